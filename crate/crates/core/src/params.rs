//! Model rates and constants shared by every layer.

use crate::error::{Error, Result};
use crate::mode::DisorientationParams;
use crate::scalar::Scalar;

/// How the mode-switching rate `r_MS` is chosen under collaborative switching.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SwitchRule<T> {
    /// A fixed rate.
    Constant(T),
    /// `α / r_int` from the known global interaction rate.
    Adaptive { alpha: T },
    /// `α / r̂_int` from each agent's own windowed estimate.
    LocalEstimate { alpha: T },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModeSwitch<T> {
    /// Roles assigned up front; `n_pl` perfect localizers never switch.
    Fixed {
        n_pl: usize,
    },
    /// Agents cycle on their own and do not collaborate.
    Individual,
    Collaborative(SwitchRule<T>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwarmParams<T> {
    pub n_agents: usize,
    /// Rate at which a dead reckoner becomes lost (1/s).
    pub r_lost: T,
    /// Swarm-wide pairwise interaction rate (1/s).
    pub r_int: T,
    /// Re-localization penalty (s). `r_p = 1/τ_p`.
    pub tau_p: T,
    pub mode_switch: ModeSwitch<T>,
    pub disorientation: DisorientationParams<T>,
    /// Total simulated time (s).
    pub horizon: T,
    pub dt: T,
}

impl<T: Scalar> SwarmParams<T> {
    /// Fixed-mode parameters with the remaining fields at their defaults.
    pub fn fixed(n_agents: usize, n_pl: usize, r_lost: T, r_int: T) -> Self {
        Self {
            n_agents,
            r_lost,
            r_int,
            mode_switch: ModeSwitch::Fixed { n_pl },
            ..Self::default()
        }
    }

    pub fn with_tau_p(mut self, tau_p: T) -> Self {
        self.tau_p = tau_p;
        self
    }

    pub fn with_mode_switch(mut self, mode_switch: ModeSwitch<T>) -> Self {
        self.mode_switch = mode_switch;
        self
    }

    pub fn with_horizon(mut self, horizon: T) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    pub fn r_p(&self) -> T {
        self.tau_p.recip()
    }

    pub fn n(&self) -> T {
        T::from_count(self.n_agents)
    }

    /// Number of fixed perfect localizers, zero outside fixed mode.
    pub fn n_pl(&self) -> usize {
        match self.mode_switch {
            ModeSwitch::Fixed { n_pl } => n_pl,
            _ => 0,
        }
    }

    pub fn n_dr(&self) -> usize {
        self.n_agents - self.n_pl().min(self.n_agents)
    }

    /// Pairwise recovery coefficient `2 r_int / (N (N − 1))`.
    pub fn pair_coefficient(&self) -> Result<T> {
        if self.n_agents < 2 {
            return Err(Error::Domain(format!(
                "pairwise interaction needs N >= 2, got {}",
                self.n_agents
            )));
        }
        let n = self.n();
        Ok(T::lit(2.0) * self.r_int / (n * (n - T::one())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 1 {
            return Err(Error::param("n_agents", "must be >= 1"));
        }
        non_negative("r_lost", self.r_lost)?;
        non_negative("r_int", self.r_int)?;
        if !(self.tau_p > T::zero()) || !self.tau_p.is_finite() {
            return Err(Error::param("tau_p", "must be finite and > 0"));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::param("dt", "must be finite and > 0"));
        }
        if !(self.horizon >= self.dt) || !self.horizon.is_finite() {
            return Err(Error::param("horizon", "must be finite and >= dt"));
        }
        self.disorientation.validate()?;
        match self.mode_switch {
            ModeSwitch::Fixed { n_pl } if n_pl > self.n_agents => Err(Error::param(
                "n_pl",
                format!("N_PL = {n_pl} exceeds N = {}", self.n_agents),
            )),
            ModeSwitch::Collaborative(SwitchRule::Constant(r)) => non_negative("r_ms", r),
            ModeSwitch::Collaborative(SwitchRule::Adaptive { alpha })
            | ModeSwitch::Collaborative(SwitchRule::LocalEstimate { alpha }) => {
                if alpha > T::zero() && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("alpha", "must be finite and > 0"))
                }
            }
            _ => Ok(()),
        }
    }
}

fn non_negative<T: Scalar>(field: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("must be finite and >= 0, got {v}")))
    }
}

impl<T: Scalar> Default for SwarmParams<T> {
    fn default() -> Self {
        Self {
            n_agents: 30,
            r_lost: T::lit(0.04),
            r_int: T::one(),
            tau_p: T::lit(10.0),
            mode_switch: ModeSwitch::Fixed { n_pl: 0 },
            disorientation: DisorientationParams::default(),
            horizon: T::lit(200.0),
            dt: T::lit(0.01),
        }
    }
}
