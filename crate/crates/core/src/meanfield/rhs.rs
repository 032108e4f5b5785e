use crate::error::{Error, Result};
use crate::meanfield::{MeanFieldSystem, OccupancyVector};
use crate::mode::AgentMode;
use crate::params::SwarmParams;
use crate::scalar::Scalar;

/// Fixed roles with collaboration. The perfect-localizer count is held constant.
pub fn rhs_fixed<T: Scalar>(state: &OccupancyVector<T>, params: &SwarmParams<T>) -> Result<OccupancyVector<T>> {
    let k = params.pair_coefficient()?;
    let d_not_lost = -params.r_lost * state.dr_not_lost + k * state.pl * state.dr_lost;
    Ok(OccupancyVector::new(d_not_lost, -d_not_lost, T::zero(), T::zero()))
}

/// Individual mode switching without collaboration.
///
/// Lost dead reckoners and perfect localizers are zero-residence states: loss feeds
/// `PL†` directly and finished re-localization feeds the not-lost pool directly. Their
/// rows are zero; use [`OccupancyVector::collapse_instantaneous`] on initial states.
pub fn rhs_individual<T: Scalar>(state: &OccupancyVector<T>, params: &SwarmParams<T>) -> Result<OccupancyVector<T>> {
    let to_dagger = params.r_lost * state.dr_not_lost;
    let relocalized = params.r_p() * state.pl_dagger;
    Ok(OccupancyVector::new(
        relocalized - to_dagger,
        T::zero(),
        to_dagger - relocalized,
        T::zero(),
    ))
}

/// Collaborative mode switching at rate `r_ms`.
pub fn rhs_collaborative<T: Scalar>(
    state: &OccupancyVector<T>,
    params: &SwarmParams<T>,
    r_ms: T,
) -> Result<OccupancyVector<T>> {
    if !(r_ms >= T::zero()) {
        return Err(Error::Domain(format!("r_ms must be >= 0, got {r_ms}")));
    }
    let k = params.pair_coefficient()?;
    let recovered = k * state.pl * state.dr_lost;
    let d_lost = params.r_lost * state.dr_not_lost - r_ms * state.dr_lost - recovered;
    let d_dagger = r_ms * state.dr_lost - params.r_p() * state.pl_dagger;
    let d_pl = params.r_p() * state.pl_dagger - r_ms * state.pl;
    let d_not_lost = -(d_lost + d_dagger + d_pl);
    Ok(OccupancyVector::new(d_not_lost, d_lost, d_dagger, d_pl))
}

const FIXED_MODES: [AgentMode; 2] = [AgentMode::DrNotLost, AgentMode::DrLost];
const INDIVIDUAL_MODES: [AgentMode; 2] = [AgentMode::DrNotLost, AgentMode::PlDagger];

#[derive(Clone, Copy, Debug)]
pub struct FixedModes<T> {
    pub params: SwarmParams<T>,
}

impl<T: Scalar> MeanFieldSystem<T> for FixedModes<T> {
    fn rhs(&self, state: &OccupancyVector<T>) -> Result<OccupancyVector<T>> {
        rhs_fixed(state, &self.params)
    }

    fn dynamic_modes(&self) -> &[AgentMode] {
        &FIXED_MODES
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IndividualSwitching<T> {
    pub params: SwarmParams<T>,
}

impl<T: Scalar> MeanFieldSystem<T> for IndividualSwitching<T> {
    fn rhs(&self, state: &OccupancyVector<T>) -> Result<OccupancyVector<T>> {
        rhs_individual(state, &self.params)
    }

    fn dynamic_modes(&self) -> &[AgentMode] {
        &INDIVIDUAL_MODES
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CollaborativeSwitching<T> {
    pub params: SwarmParams<T>,
    pub r_ms: T,
}

impl<T: Scalar> MeanFieldSystem<T> for CollaborativeSwitching<T> {
    fn rhs(&self, state: &OccupancyVector<T>) -> Result<OccupancyVector<T>> {
        rhs_collaborative(state, &self.params, self.r_ms)
    }

    fn dynamic_modes(&self) -> &[AgentMode] {
        &AgentMode::ALL
    }
}

/// Wraps an arbitrary right-hand side, e.g. for synthetic test systems.
pub struct FnSystem<F> {
    pub f: F,
    pub modes: Vec<AgentMode>,
}

impl<T, F> MeanFieldSystem<T> for FnSystem<F>
where
    T: Scalar,
    F: Fn(&OccupancyVector<T>) -> Result<OccupancyVector<T>>,
{
    fn rhs(&self, state: &OccupancyVector<T>) -> Result<OccupancyVector<T>> {
        (self.f)(state)
    }

    fn dynamic_modes(&self) -> &[AgentMode] {
        &self.modes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModeSwitch;
    use proptest::prelude::*;

    fn fixed(n: usize, n_pl: usize, r_l: f64, r_int: f64) -> SwarmParams<f64> {
        SwarmParams::fixed(n, n_pl, r_l, r_int)
    }

    #[test]
    fn fixed_without_loss_is_at_rest() {
        let p = fixed(30, 5, 0.0, 10.0);
        let d = rhs_fixed(&OccupancyVector::new(25.0, 0.0, 0.0, 5.0), &p).unwrap();
        assert_eq!(d, OccupancyVector::zero());
    }

    #[test]
    fn fixed_substitution() {
        // −0.04·25 + (20/870)·5·0 = −1.0
        let p = fixed(30, 5, 0.04, 10.0);
        let d = rhs_fixed(&OccupancyVector::new(25.0, 0.0, 0.0, 5.0), &p).unwrap();
        assert!((d.dr_not_lost + 1.0).abs() < 1e-15);
        assert_eq!(d.dr_lost, -d.dr_not_lost);
        assert_eq!((d.pl_dagger, d.pl), (0.0, 0.0));
    }

    #[test]
    fn fixed_without_localizers_has_no_recovery() {
        let p = fixed(30, 0, 0.04, 10.0);
        let d = rhs_fixed(&OccupancyVector::new(20.0, 10.0, 0.0, 0.0), &p).unwrap();
        assert!((d.dr_not_lost + 0.04 * 20.0).abs() < 1e-15);
    }

    #[test]
    fn pairwise_terms_need_two_agents() {
        let p = fixed(1, 0, 0.04, 10.0);
        assert!(matches!(
            rhs_fixed(&OccupancyVector::new(1.0, 0.0, 0.0, 0.0), &p),
            Err(Error::Domain(_))
        ));
        assert!(rhs_collaborative(&OccupancyVector::new(1.0, 0.0, 0.0, 0.0), &p, 0.1).is_err());
    }

    #[test]
    fn individual_substitution() {
        let p = SwarmParams::<f64>::default().with_mode_switch(ModeSwitch::Individual);
        let d = rhs_individual(&OccupancyVector::new(30.0, 0.0, 0.0, 0.0), &p).unwrap();
        assert!((d.dr_not_lost + 0.04 * 30.0).abs() < 1e-15);
        let no_loss = SwarmParams { r_lost: 0.0, ..p };
        let d = rhs_individual(&OccupancyVector::new(30.0, 0.0, 0.0, 0.0), &no_loss).unwrap();
        assert_eq!(d, OccupancyVector::zero());
    }

    #[test]
    fn collaborative_degenerates_to_fixed() {
        let p = fixed(30, 5, 0.04, 10.0);
        let s = OccupancyVector::new(17.0, 8.0, 0.0, 5.0);
        assert_eq!(rhs_collaborative(&s, &p, 0.0).unwrap(), rhs_fixed(&s, &p).unwrap());
    }

    #[test]
    fn collaborative_without_interaction_has_no_recovery() {
        let p = fixed(30, 5, 0.04, 0.0);
        let s = OccupancyVector::new(10.0, 8.0, 7.0, 5.0);
        let d = rhs_collaborative(&s, &p, 0.2).unwrap();
        assert!((d.dr_lost - (0.04 * 10.0 - 0.2 * 8.0)).abs() < 1e-14);
    }

    #[test]
    fn negative_switch_rate_rejected() {
        let p = fixed(30, 5, 0.04, 1.0);
        assert!(rhs_collaborative(&OccupancyVector::zero(), &p, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn every_rhs_conserves(
            a in 0.0f64..30.0, b in 0.0f64..30.0, c in 0.0f64..30.0, d in 0.0f64..30.0,
            r_l in 0.0f64..1.0, r_int in 0.0f64..100.0, r_ms in 0.0f64..10.0, tau_p in 0.1f64..200.0,
        ) {
            let p = fixed(30, 5, r_l, r_int).with_tau_p(tau_p);
            let s = OccupancyVector::new(a, b, c, d);
            let scale = 1.0 + r_l * 30.0 + r_int * 30.0 + r_ms * 30.0 + 30.0 / tau_p;
            for dv in [
                rhs_fixed(&s, &p).unwrap(),
                rhs_individual(&s, &p).unwrap(),
                rhs_collaborative(&s, &p, r_ms).unwrap(),
            ] {
                prop_assert!(dv.total().abs() <= 1e-13 * scale);
            }
        }
    }
}
