use crate::error::{Error, Result};
use crate::meanfield::{
    stability_check, CollaborativeSwitching, FixedModes, IndividualSwitching, MeanFieldSystem, OccupancyVector,
};
use crate::params::SwarmParams;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyStateReport<T> {
    pub occupancy: OccupancyVector<T>,
    /// `n_DR^NotLost / N`.
    pub productivity_per_agent: T,
    pub stable: bool,
    /// Set for boundary configurations (no localizers, no dead reckoners, no dynamics).
    pub degenerate: bool,
    pub evidence: String,
}

impl<T: Scalar> SteadyStateReport<T> {
    fn assess<S: MeanFieldSystem<T>>(
        system: &S,
        occupancy: OccupancyVector<T>,
        n: T,
        degenerate: bool,
    ) -> Result<Self> {
        let report = stability_check(system, &occupancy)?;
        Ok(Self {
            occupancy,
            productivity_per_agent: occupancy.dr_not_lost / n,
            stable: report.stable,
            degenerate,
            evidence: report.evidence,
        })
    }
}

/// Fixed-mode productivity as a function of the localizer fraction `f = N_PL / N`:
///
/// `(1 − f) / (1 + (r_L (N − 1) / (2 r_int)) / f)`
///
/// Returns 0 at `f = 0` (no recovery possible once everybody is lost).
pub fn fixed_productivity<T: Scalar>(n_agents: usize, r_lost: T, r_int: T, fraction: T) -> T {
    if fraction <= T::zero() {
        return if r_lost > T::zero() { T::zero() } else { T::one() };
    }
    let n = T::from_count(n_agents);
    let a = r_lost * (n - T::one()) / (T::lit(2.0) * r_int);
    (T::one() - fraction) / (T::one() + a / fraction)
}

/// Closed-form steady state of the fixed-mode system.
pub fn steady_state_fixed<T: Scalar>(params: &SwarmParams<T>) -> Result<SteadyStateReport<T>> {
    params.validate()?;
    let n = params.n();
    let n_pl = T::from_count(params.n_pl());
    let n_dr = T::from_count(params.n_dr());
    let recovery = params.pair_coefficient()? * n_pl;
    let denom = params.r_lost + recovery;
    let not_lost = if denom > T::zero() {
        n_dr * recovery / denom
    } else {
        n_dr
    };
    let occupancy = OccupancyVector::new(not_lost, n_dr - not_lost, T::zero(), n_pl);
    let degenerate = params.n_pl() == 0 || params.n_pl() == params.n_agents || denom == T::zero();
    SteadyStateReport::assess(&FixedModes { params: *params }, occupancy, n, degenerate)
}

/// Localizer fraction maximizing fixed-mode productivity:
///
/// `(r_L (N − 1) / (2 r_int)) · (−1 + sqrt(1 + 2 r_int / ((N − 1) r_L)))`
pub fn optimal_pl_fraction<T: Scalar>(params: &SwarmParams<T>) -> Result<T> {
    if !(params.r_int > T::zero()) {
        return Err(Error::Domain("optimal fraction needs r_int > 0".into()));
    }
    if !(params.r_lost > T::zero()) {
        return Err(Error::Domain("optimal fraction needs r_L > 0".into()));
    }
    if params.n_agents < 2 {
        return Err(Error::Domain("optimal fraction needs N >= 2".into()));
    }
    let a = params.r_lost * (params.n() - T::one()) / (T::lit(2.0) * params.r_int);
    // a (sqrt(1 + 1/a) − 1) rationalized; avoids cancellation for large a.
    Ok(T::one() / (T::one() + (T::one() + a.recip()).sqrt()))
}

/// Closed-form steady state of individual mode switching: `r_p / (r_p + r_L)`.
pub fn steady_state_individual<T: Scalar>(params: &SwarmParams<T>) -> Result<SteadyStateReport<T>> {
    if !(params.tau_p > T::zero()) {
        return Err(Error::param("tau_p", "must be > 0"));
    }
    let n = params.n();
    let r_p = params.r_p();
    let total = r_p + params.r_lost;
    if !(total > T::zero()) {
        let occupancy = OccupancyVector::new(n, T::zero(), T::zero(), T::zero());
        return Ok(SteadyStateReport {
            occupancy,
            productivity_per_agent: T::one(),
            stable: false,
            degenerate: true,
            evidence: "r_p = r_L = 0: every state is an equilibrium".into(),
        });
    }
    let productivity = r_p / total;
    let not_lost = n * productivity;
    let occupancy = OccupancyVector::new(not_lost, T::zero(), n - not_lost, T::zero());
    let mut report = SteadyStateReport::assess(&IndividualSwitching { params: *params }, occupancy, n, false)?;
    report.productivity_per_agent = productivity;
    Ok(report)
}

/// Closed-form steady state of collaborative switching at rate `r_ms`.
///
/// At rest `n_PL† = (r_ms/r_p) n_PL` and `n_Lost = n_PL`, with `n_PL` the positive root of
/// `k n² + (r_ms + r_L (2 + r_ms/r_p)) n − r_L N = 0`, `k = 2 r_int / (N (N − 1))`.
/// Productivity is `1 − (2 + r_ms/r_p) n_PL / N`.
pub fn steady_state_collaborative<T: Scalar>(params: &SwarmParams<T>, r_ms: T) -> Result<SteadyStateReport<T>> {
    if !(r_ms > T::zero()) {
        return Err(Error::Domain(format!(
            "collaborative steady state needs r_ms > 0, got {r_ms}"
        )));
    }
    if !(params.tau_p > T::zero() && params.tau_p.is_finite()) {
        return Err(Error::Domain("collaborative steady state needs r_p > 0".into()));
    }
    let n = params.n();
    let k = params.pair_coefficient()?;
    let ratio = r_ms / params.r_p();
    let b = r_ms + params.r_lost * (T::lit(2.0) + ratio);
    let c = params.r_lost * n;
    // Positive root in the cancellation-free form 2c / (b + sqrt(b² + 4kc)).
    let disc = b * b + T::lit(4.0) * k * c;
    let n_pl = if c == T::zero() {
        T::zero()
    } else {
        T::lit(2.0) * c / (b + disc.sqrt())
    };
    let upper = n / (T::lit(2.0) + ratio);
    if !(n_pl >= T::zero() && n_pl <= upper * (T::one() + T::epsilon() * T::lit(8.0))) {
        return Err(Error::Consistency(format!(
            "steady-state n_PL = {n_pl} outside [0, {upper}]"
        )));
    }
    let productivity = T::one() - (T::lit(2.0) + ratio) * n_pl / n;
    let occupancy = OccupancyVector::new(n - (T::lit(2.0) + ratio) * n_pl, n_pl, ratio * n_pl, n_pl);
    let mut report = SteadyStateReport::assess(&CollaborativeSwitching { params: *params, r_ms }, occupancy, n, false)?;
    report.productivity_per_agent = productivity;
    Ok(report)
}

/// Cap applied to the adaptive rule when the interaction rate vanishes: `10³ / τ_p`.
pub fn mean_field_rate_cap<T: Scalar>(tau_p: T) -> T {
    T::lit(1e3) / tau_p
}

/// Adaptive rule `r_MS = α / r_int`, limited to `r_ms_max`.
pub fn adaptive_mode_switch_rate<T: Scalar>(r_int: T, alpha: T, r_ms_max: T) -> T {
    if r_int > T::zero() {
        (alpha / r_int).min(r_ms_max)
    } else {
        r_ms_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::{integrate, IntegrationOptions};
    use crate::params::ModeSwitch;
    use approx::assert_abs_diff_eq;

    fn fixed(n_pl: usize, r_l: f64, r_int: f64) -> SwarmParams<f64> {
        SwarmParams::fixed(30, n_pl, r_l, r_int)
    }

    fn rk4_final<S: MeanFieldSystem<f64>>(sys: &S, start: OccupancyVector<f64>) -> OccupancyVector<f64> {
        let opts = IntegrationOptions::new(0.01, 1e4).with_steady_tolerance(1e-12);
        *integrate(sys, start, &opts).unwrap().states.last().unwrap()
    }

    #[test]
    fn fixed_closed_form_value() {
        // (25/30) / (1 + 0.058 · 6) = 0.61819...
        let r = steady_state_fixed(&fixed(5, 0.04, 10.0)).unwrap();
        assert_abs_diff_eq!(r.productivity_per_agent, (25.0 / 30.0) / 1.348, epsilon = 1e-12);
        assert_abs_diff_eq!(r.productivity_per_agent, 0.6182, epsilon = 1e-4);
        assert!(r.stable && !r.degenerate);
        assert_abs_diff_eq!(
            r.productivity_per_agent,
            fixed_productivity(30, 0.04, 10.0, 5.0 / 30.0),
            epsilon = 1e-14
        );
    }

    #[test]
    fn fixed_closed_form_matches_rk4() {
        let p = fixed(5, 0.04, 10.0);
        let end = rk4_final(&FixedModes { params: p }, OccupancyVector::fixed_start(30, 5));
        assert_abs_diff_eq!(end.productivity(), 0.618_199_802_176_063_3, epsilon = 1e-4);
        assert_abs_diff_eq!(
            end.productivity(),
            steady_state_fixed(&p).unwrap().productivity_per_agent,
            epsilon = 1e-9
        );
    }

    #[test]
    fn fixed_degenerate_configurations() {
        let all_pl = steady_state_fixed(&fixed(30, 0.04, 10.0)).unwrap();
        assert_eq!(all_pl.productivity_per_agent, 0.0);
        assert!(all_pl.degenerate);
        let none = steady_state_fixed(&fixed(0, 0.04, 10.0)).unwrap();
        assert_eq!(none.productivity_per_agent, 0.0);
        assert!(none.degenerate);
        assert!(fixed_productivity(30, 0.04, 10.0, 1e-12) < 1e-10);
    }

    #[test]
    fn optimal_fraction_value_and_literal_form() {
        let p = fixed(0, 0.04, 10.0);
        let f = optimal_pl_fraction(&p).unwrap();
        let a: f64 = 0.04 * 29.0 / 20.0;
        let literal = a * (-1.0 + (1.0f64 + 20.0 / (29.0 * 0.04)).sqrt());
        assert_abs_diff_eq!(f, literal, epsilon = 1e-14);
        assert_abs_diff_eq!(f, 0.1897, epsilon = 1e-4);
    }

    #[test]
    fn optimal_fraction_matches_grid_argmax() {
        for (r_l, r_int) in [(0.04, 10.0), (0.01, 0.1), (0.1, 100.0), (0.05, 3.0)] {
            let f = optimal_pl_fraction(&fixed(0, r_l, r_int)).unwrap();
            let best = (1..10_000)
                .map(|i| i as f64 * 1e-4)
                .max_by(|x, y| {
                    fixed_productivity(30, r_l, r_int, *x)
                        .partial_cmp(&fixed_productivity(30, r_l, r_int, *y))
                        .unwrap()
                })
                .unwrap();
            assert!((f - best).abs() <= 1e-4, "r_L={r_l} r_int={r_int}: {f} vs {best}");
        }
    }

    #[test]
    fn optimal_fraction_shrinks_with_interaction() {
        let lo = optimal_pl_fraction(&fixed(0, 0.04, 1.0)).unwrap();
        let hi = optimal_pl_fraction(&fixed(0, 0.04, 1e6)).unwrap();
        assert!(hi < lo && hi < 0.01);
        assert!(optimal_pl_fraction(&fixed(0, 0.04, 0.0)).is_err());
    }

    #[test]
    fn individual_values() {
        let base = SwarmParams::<f64>::default().with_mode_switch(ModeSwitch::Individual);
        let sym = SwarmParams {
            r_lost: 0.1,
            ..base.with_tau_p(10.0)
        };
        assert_abs_diff_eq!(
            steady_state_individual(&sym).unwrap().productivity_per_agent,
            0.5,
            epsilon = 1e-15
        );
        let no_loss = SwarmParams { r_lost: 0.0, ..base };
        assert_eq!(steady_state_individual(&no_loss).unwrap().productivity_per_agent, 1.0);
        let fig = base.with_tau_p(100.0);
        let r = steady_state_individual(&fig).unwrap();
        assert_abs_diff_eq!(r.productivity_per_agent, 0.2, epsilon = 1e-15);
        assert!(r.stable);
    }

    #[test]
    fn individual_is_independent_of_interaction() {
        let base = SwarmParams::<f64>::default().with_tau_p(100.0);
        for r_int in [0.0, 0.1, 10.0, 1e4] {
            let p = SwarmParams { r_int, ..base };
            assert_abs_diff_eq!(
                steady_state_individual(&p).unwrap().productivity_per_agent,
                0.2,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn individual_closed_form_matches_rk4() {
        let p = SwarmParams::<f64>::default().with_tau_p(100.0);
        let start = OccupancyVector::new(20.0, 4.0, 3.0, 3.0).collapse_instantaneous();
        let end = rk4_final(&IndividualSwitching { params: p }, start);
        assert_abs_diff_eq!(end.productivity(), 0.2, epsilon = 1e-9);
    }

    #[test]
    fn individual_degenerate() {
        let p = SwarmParams::<f64> {
            r_lost: 0.0,
            tau_p: f64::INFINITY,
            ..Default::default()
        };
        assert!(steady_state_individual(&p).unwrap().degenerate);
    }

    #[test]
    fn collaborative_example_matches_rk4() {
        let p = fixed(0, 0.04, 10.0).with_tau_p(100.0);
        let r = steady_state_collaborative(&p, 0.001).unwrap();
        assert_abs_diff_eq!(r.occupancy.pl, 5.609, epsilon = 1e-3);
        assert_abs_diff_eq!(r.productivity_per_agent, 0.607, epsilon = 1e-3);
        assert!(r.stable);
        let sys = CollaborativeSwitching { params: p, r_ms: 0.001 };
        let end = rk4_final(&sys, OccupancyVector::new(30.0, 0.0, 0.0, 0.0));
        assert_abs_diff_eq!(end.productivity(), r.productivity_per_agent, epsilon = 1e-4);
        assert_abs_diff_eq!(end.pl, r.occupancy.pl, epsilon = 1e-3);
    }

    #[test]
    fn collaborative_limits() {
        for r_int in [0.1, 1.0, 10.0, 100.0] {
            let p = fixed(0, 0.04, r_int).with_tau_p(100.0);
            let fast = steady_state_collaborative(&p, 1e3).unwrap().productivity_per_agent;
            assert!((fast - 0.2).abs() <= 0.02 * 0.2, "fast r_int={r_int}: {fast}");
            let fstar = optimal_pl_fraction(&p).unwrap();
            let best_fixed = fixed_productivity(30, 0.04, r_int, fstar);
            let slow = steady_state_collaborative(&p, 1e-5).unwrap().productivity_per_agent;
            assert!(
                (slow - best_fixed).abs() <= 0.02 * best_fixed,
                "slow r_int={r_int}: {slow} vs {best_fixed}"
            );
        }
    }

    #[test]
    fn collaborative_preconditions() {
        let p = fixed(0, 0.04, 10.0);
        assert!(steady_state_collaborative(&p, 0.0).is_err());
        assert!(steady_state_collaborative(&fixed(0, 0.04, 10.0).with_tau_p(f64::INFINITY), 0.1).is_err());
    }

    #[test]
    fn adaptive_rule_examples() {
        let cap = mean_field_rate_cap(100.0);
        assert_abs_diff_eq!(adaptive_mode_switch_rate(1.0, 0.01, cap), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(adaptive_mode_switch_rate(10.0, 0.01, cap), 0.001, epsilon = 1e-15);
        assert_abs_diff_eq!(adaptive_mode_switch_rate(0.01, 0.01, cap), 1.0, epsilon = 1e-15);
        assert_eq!(adaptive_mode_switch_rate(0.0, 0.01, cap), 10.0);
    }

    #[test]
    fn adaptive_curve_envelope_and_rise() {
        let p = fixed(0, 0.04, 1.0).with_tau_p(100.0);
        let cap = mean_field_rate_cap(100.0);
        let mut last = 0.0;
        for i in 0..=40 {
            let r_int = 10f64.powf(-1.0 + i as f64 * 0.1);
            let p = SwarmParams { r_int, ..p };
            let r_ms = adaptive_mode_switch_rate(r_int, 0.01, cap);
            let prod = steady_state_collaborative(&p, r_ms).unwrap().productivity_per_agent;
            let best_fixed = fixed_productivity(30, 0.04, r_int, optimal_pl_fraction(&p).unwrap());
            // Below r_int ≈ 0.4 the curve first dips as r_MS shrinks.
            if r_int >= 0.5 {
                assert!(prod >= last, "r_int={r_int}: {prod} < {last}");
            }
            let envelope = best_fixed.max(0.2);
            assert!(prod <= envelope + 1e-12, "r_int={r_int}: {prod} above {envelope}");
            last = prod;
        }
    }

    #[test]
    fn single_precision_steady_states() {
        let p = SwarmParams::<f32>::fixed(30, 5, 0.04, 10.0);
        let r = steady_state_fixed(&p).unwrap();
        assert!((r.productivity_per_agent - 0.6182).abs() < 1e-4);
        let c = steady_state_collaborative(&p.with_tau_p(100.0), 0.001).unwrap();
        assert!((c.productivity_per_agent - 0.6074).abs() < 1e-3);
    }
}
