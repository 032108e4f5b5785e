//! Mean-field ODE model of the swarm occupancy.
//!
//! Three regimes are covered: fixed roles with collaboration, individual mode switching
//! without collaboration, and collaborative mode switching. Each regime exposes its
//! right-hand side, a closed-form steady state and, through [`MeanFieldSystem`], the
//! numerical integrator and stability check.

mod integrate;
mod rhs;
mod stability;
mod steady;

use std::ops::{Add, Mul, Sub};

use crate::csvio::CsvRecord;
use crate::error::Result;
use crate::mode::AgentMode;
use crate::scalar::Scalar;

pub use integrate::{integrate, IntegrationOptions, Trajectory};
pub use rhs::{
    rhs_collaborative, rhs_fixed, rhs_individual, CollaborativeSwitching, FixedModes, FnSystem, IndividualSwitching,
};
pub use stability::{
    characteristic_polynomial, reduced_jacobian, routh_hurwitz, stability_check, RouthHurwitz, StabilityReport,
};
pub use steady::{
    adaptive_mode_switch_rate, fixed_productivity, mean_field_rate_cap, optimal_pl_fraction,
    steady_state_collaborative, steady_state_fixed, steady_state_individual, SteadyStateReport,
};

/// Mean number of agents in each mode. Continuous in the mean field.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OccupancyVector<T> {
    pub dr_not_lost: T,
    pub dr_lost: T,
    pub pl_dagger: T,
    pub pl: T,
}

impl<T: Scalar> OccupancyVector<T> {
    pub fn new(dr_not_lost: T, dr_lost: T, pl_dagger: T, pl: T) -> Self {
        Self {
            dr_not_lost,
            dr_lost,
            pl_dagger,
            pl,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// All dead reckoners not lost, `n_pl` perfect localizers.
    pub fn fixed_start(n_agents: usize, n_pl: usize) -> Self {
        Self::new(
            T::from_count(n_agents.saturating_sub(n_pl)),
            T::zero(),
            T::zero(),
            T::from_count(n_pl),
        )
    }

    pub fn from_array(a: [T; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.dr_not_lost, self.dr_lost, self.pl_dagger, self.pl]
    }

    pub fn get(&self, mode: AgentMode) -> T {
        self.to_array()[mode.index()]
    }

    pub fn set(&mut self, mode: AgentMode, value: T) {
        let mut a = self.to_array();
        a[mode.index()] = value;
        *self = Self::from_array(a);
    }

    pub fn total(&self) -> T {
        self.dr_not_lost + self.dr_lost + self.pl_dagger + self.pl
    }

    pub fn max_abs(&self) -> T {
        self.to_array().iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn min_component(&self) -> T {
        self.to_array().iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    /// Productivity per agent: the not-lost dead-reckoner share.
    pub fn productivity(&self) -> T {
        self.dr_not_lost / self.total()
    }

    /// Applies the instantaneous transitions of individual mode switching: lost dead
    /// reckoners become `PL†`, perfect localizers revert to dead reckoning.
    pub fn collapse_instantaneous(self) -> Self {
        Self::new(
            self.dr_not_lost + self.pl,
            T::zero(),
            self.pl_dagger + self.dr_lost,
            T::zero(),
        )
    }
}

impl<T: Scalar> Add for OccupancyVector<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(
            self.dr_not_lost + o.dr_not_lost,
            self.dr_lost + o.dr_lost,
            self.pl_dagger + o.pl_dagger,
            self.pl + o.pl,
        )
    }
}

impl<T: Scalar> Sub for OccupancyVector<T> {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        Self::new(
            self.dr_not_lost - o.dr_not_lost,
            self.dr_lost - o.dr_lost,
            self.pl_dagger - o.pl_dagger,
            self.pl - o.pl,
        )
    }
}

impl<T: Scalar> Mul<T> for OccupancyVector<T> {
    type Output = Self;

    fn mul(self, s: T) -> Self {
        Self::new(self.dr_not_lost * s, self.dr_lost * s, self.pl_dagger * s, self.pl * s)
    }
}

/// A mean-field right-hand side together with the modes it evolves.
pub trait MeanFieldSystem<T: Scalar> {
    fn rhs(&self, state: &OccupancyVector<T>) -> Result<OccupancyVector<T>>;

    /// Modes whose occupancy changes. The first one is eliminated through conservation
    /// when the Jacobian is reduced.
    fn dynamic_modes(&self) -> &[AgentMode];
}

/// Regime label used in sweep output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Fixed,
    FixedOptimal,
    Individual,
    Collaborative,
    Adaptive,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Fixed => "fixed",
            Regime::FixedOptimal => "fixed_optimal",
            Regime::Individual => "individual",
            Regime::Collaborative => "collaborative",
            Regime::Adaptive => "adaptive",
        }
    }
}

/// One row of mean-field sweep output.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub regime: Regime,
    pub n_agents: usize,
    pub r_lost: f64,
    pub r_int: f64,
    /// `N_PL` for fixed regimes, `α` for the adaptive curve, empty otherwise.
    pub n_pl_or_alpha: Option<f64>,
    pub r_ms: Option<f64>,
    pub productivity: f64,
    pub stable: bool,
}

impl CsvRecord for SweepRow {
    fn header() -> &'static [&'static str] {
        &[
            "regime",
            "N",
            "r_L",
            "r_int",
            "n_pl_or_alpha",
            "r_ms",
            "productivity",
            "stable",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.regime.label().to_string(),
            self.n_agents.to_string(),
            self.r_lost.to_string(),
            self.r_int.to_string(),
            opt(self.n_pl_or_alpha),
            opt(self.r_ms),
            self.productivity.to_string(),
            self.stable.to_string(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupancy_arithmetic() {
        let a = OccupancyVector::new(1.0, 2.0, 3.0, 4.0);
        let b = a + a * 2.0 - a;
        assert_eq!(b.to_array(), [2.0, 4.0, 6.0, 8.0]);
        assert_eq!(a.total(), 10.0);
        assert_eq!(a.get(AgentMode::PlDagger), 3.0);
        assert_eq!(a.collapse_instantaneous().to_array(), [5.0, 0.0, 5.0, 0.0]);
    }

    #[test]
    fn sweep_row_fields_match_header() {
        let row = SweepRow {
            regime: Regime::Adaptive,
            n_agents: 30,
            r_lost: 0.04,
            r_int: 10.0,
            n_pl_or_alpha: Some(0.01),
            r_ms: Some(0.001),
            productivity: 0.6,
            stable: true,
        };
        assert_eq!(row.fields().len(), SweepRow::header().len());
        assert_eq!(row.fields()[0], "adaptive");
    }
}
