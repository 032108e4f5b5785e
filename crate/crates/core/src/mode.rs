//! The four-state agent machine, disorientation, productivity and pairwise correction.
//!
//! An agent is either a dead reckoner (cheap, drifting, productive while not lost) or a
//! perfect localizer (fully localized, unproductive, able to correct others). `PlDagger`
//! is the transitional re-localization state between the two.
//!
//! ```text
//!   DrNotLost --lost--> DrLost --switch--> PlDagger --localized--> Pl
//!       ^                 |                                         |
//!       +---corrected-----+                                         |
//!       +---------------------------switch--------------------------+
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentMode {
    DrNotLost,
    DrLost,
    PlDagger,
    Pl,
}

impl AgentMode {
    pub const ALL: [AgentMode; 4] = [
        AgentMode::DrNotLost,
        AgentMode::DrLost,
        AgentMode::PlDagger,
        AgentMode::Pl,
    ];

    /// Position in the occupancy ordering `(not lost, lost, PL†, PL)`.
    pub fn index(self) -> usize {
        match self {
            AgentMode::DrNotLost => 0,
            AgentMode::DrLost => 1,
            AgentMode::PlDagger => 2,
            AgentMode::Pl => 3,
        }
    }

    pub fn is_dead_reckoner(self) -> bool {
        matches!(self, AgentMode::DrNotLost | AgentMode::DrLost)
    }

    /// Only a fully localized agent can share its position.
    pub fn can_assist(self) -> bool {
        self == AgentMode::Pl
    }

    /// Mode-level productivity: 1 for a not-lost dead reckoner, 0 otherwise.
    pub fn productivity(self) -> u8 {
        u8::from(self == AgentMode::DrNotLost)
    }

    /// Whether `self -> to` is an edge of the state machine.
    pub fn can_transition(self, to: AgentMode) -> bool {
        use AgentMode::*;
        matches!(
            (self, to),
            (DrNotLost, DrLost) | (DrLost, DrNotLost) | (DrLost, PlDagger) | (PlDagger, Pl) | (Pl, DrNotLost)
        )
    }

    /// Performs a transition, rejecting anything that is not an edge of the machine.
    pub fn transition(self, to: AgentMode) -> Result<AgentMode> {
        if self.can_transition(to) {
            Ok(to)
        } else {
            Err(Error::Transition { from: self, to })
        }
    }

    /// Label used in the mode time-series export.
    pub fn label(self) -> &'static str {
        match self {
            AgentMode::DrNotLost => "DR_NOTLOST",
            AgentMode::DrLost => "DR_LOST",
            AgentMode::PlDagger => "PL_DAGGER",
            AgentMode::Pl => "PL",
        }
    }
}

impl fmt::Display for AgentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AgentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DR_NOTLOST" | "DR" => Ok(AgentMode::DrNotLost),
            "DR_LOST" => Ok(AgentMode::DrLost),
            "PL_DAGGER" => Ok(AgentMode::PlDagger),
            "PL" => Ok(AgentMode::Pl),
            other => Err(Error::Domain(format!("unknown agent mode `{other}`"))),
        }
    }
}

/// Sensitivity of the lost classification: characteristic error and threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisorientationParams<T> {
    pub delta_p0: T,
    pub gamma_thresh: T,
}

impl<T: Scalar> DisorientationParams<T> {
    pub fn new(delta_p0: T, gamma_thresh: T) -> Result<Self> {
        let p = Self { delta_p0, gamma_thresh };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_p0 > T::zero()) || !self.delta_p0.is_finite() {
            return Err(Error::param("delta_p0", "must be finite and > 0"));
        }
        if !(self.gamma_thresh > T::zero() && self.gamma_thresh < T::one()) {
            return Err(Error::param("gamma_thresh", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Error magnitude at which disorientation equals the threshold.
    pub fn threshold_error(&self) -> T {
        -self.delta_p0 * (T::one() - self.gamma_thresh).ln()
    }
}

impl<T: Scalar> Default for DisorientationParams<T> {
    fn default() -> Self {
        Self {
            delta_p0: T::one(),
            gamma_thresh: T::lit(0.4),
        }
    }
}

/// `γ = 1 − exp(−|δp| / δp₀)`.
pub fn disorientation<T: Scalar>(error_magnitude: T, params: &DisorientationParams<T>) -> Result<T> {
    if error_magnitude < T::zero() || error_magnitude.is_nan() {
        return Err(Error::Domain(format!(
            "error magnitude must be >= 0, got {error_magnitude}"
        )));
    }
    Ok(-(-error_magnitude / params.delta_p0).exp_m1())
}

/// Strict: an agent exactly at the threshold is not lost.
pub fn is_lost<T: Scalar>(gamma: T, params: &DisorientationParams<T>) -> bool {
    gamma > params.gamma_thresh
}

pub fn productivity<T: Scalar>(mode: AgentMode, gamma: T, params: &DisorientationParams<T>) -> u8 {
    u8::from(mode == AgentMode::DrNotLost && !is_lost(gamma, params))
}

/// Position shared by a perfect localizer together with the measured relative offset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseCorrection<T> {
    pub p_pl: [T; 3],
    pub p_rel: [T; 3],
}

impl<T: Scalar> PoseCorrection<T> {
    /// `p_DR = p_PL + p_rel`.
    pub fn corrected_position(&self) -> [T; 3] {
        [
            self.p_pl[0] + self.p_rel[0],
            self.p_pl[1] + self.p_rel[1],
            self.p_pl[2] + self.p_rel[2],
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CorrectionOutcome<T> {
    Corrected {
        position: [T; 3],
        error: T,
        mode: AgentMode,
    },
    Unchanged,
}

impl<T> CorrectionOutcome<T> {
    pub fn is_corrected(&self) -> bool {
        matches!(self, CorrectionOutcome::Corrected { .. })
    }
}

/// Applies a correction received from `partner` to a dead reckoner.
///
/// Only a `Pl` partner can correct; anything else leaves the dead reckoner untouched.
/// Whether a not-lost dead reckoner should accept the correction is a collaboration
/// policy decided by the caller.
pub fn apply_correction<T: Scalar>(
    receiver: AgentMode,
    _dr_error: T,
    partner: AgentMode,
    correction: &PoseCorrection<T>,
) -> CorrectionOutcome<T> {
    if !receiver.is_dead_reckoner() || !partner.can_assist() {
        return CorrectionOutcome::Unchanged;
    }
    CorrectionOutcome::Corrected {
        position: correction.corrected_position(),
        error: T::zero(),
        mode: AgentMode::DrNotLost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(delta_p0: f64, thresh: f64) -> DisorientationParams<f64> {
        DisorientationParams::new(delta_p0, thresh).unwrap()
    }

    #[test]
    fn disorientation_examples() {
        let p = params(1.0, 0.4);
        assert_eq!(disorientation(0.0, &p).unwrap(), 0.0);
        assert_relative_eq!(
            disorientation(1.0, &p).unwrap(),
            0.632_120_558_828_557_7,
            epsilon = 1e-15
        );
        let far = disorientation(1e6, &p).unwrap();
        assert!(far <= 1.0 && far > 1.0 - 1e-12);
    }

    #[test]
    fn negative_error_is_a_domain_error() {
        assert!(matches!(disorientation(-0.1, &params(1.0, 0.4)), Err(Error::Domain(_))));
    }

    #[test]
    fn lost_threshold_is_strict() {
        let p = params(1.0, 0.4);
        assert!(!is_lost(0.0, &p));
        assert!(!is_lost(0.4, &p));
        assert!(is_lost(0.41, &p));
    }

    #[test]
    fn productivity_examples() {
        let p = params(1.0, 0.4);
        assert_eq!(productivity(AgentMode::DrNotLost, 0.1, &p), 1);
        assert_eq!(productivity(AgentMode::DrNotLost, 0.5, &p), 0);
        assert_eq!(productivity(AgentMode::DrLost, 0.1, &p), 0);
        assert_eq!(productivity(AgentMode::Pl, 0.0, &p), 0);
        for g in [0.0, 0.3, 0.9] {
            assert_eq!(productivity(AgentMode::PlDagger, g, &p), 0);
        }
    }

    #[test]
    fn correction_examples() {
        let c = PoseCorrection {
            p_pl: [1.0, 2.0, 3.0],
            p_rel: [0.5, -1.0, 0.25],
        };
        match apply_correction(AgentMode::DrLost, 5.2, AgentMode::Pl, &c) {
            CorrectionOutcome::Corrected { position, error, mode } => {
                assert_eq!(position, [1.5, 1.0, 3.25]);
                assert_eq!(error, 0.0);
                assert_eq!(mode, AgentMode::DrNotLost);
            }
            CorrectionOutcome::Unchanged => panic!("PL partner must correct"),
        }
        assert_eq!(
            apply_correction(AgentMode::DrLost, 5.2, AgentMode::PlDagger, &c),
            CorrectionOutcome::Unchanged
        );
        assert_eq!(
            apply_correction(AgentMode::DrLost, 5.2, AgentMode::DrNotLost, &c),
            CorrectionOutcome::Unchanged
        );
        assert_eq!(
            apply_correction(AgentMode::Pl, 0.0, AgentMode::Pl, &c),
            CorrectionOutcome::Unchanged
        );
        assert_eq!(
            apply_correction(AgentMode::PlDagger, 0.0, AgentMode::PlDagger, &c),
            CorrectionOutcome::Unchanged
        );
        assert!(apply_correction(AgentMode::DrNotLost, 0.0, AgentMode::Pl, &c).is_corrected());
    }

    #[test]
    fn transition_graph() {
        use AgentMode::*;
        let allowed = [
            (DrNotLost, DrLost),
            (DrLost, DrNotLost),
            (DrLost, PlDagger),
            (PlDagger, Pl),
            (Pl, DrNotLost),
        ];
        for from in AgentMode::ALL {
            for to in AgentMode::ALL {
                let expected = allowed.contains(&(from, to));
                assert_eq!(from.transition(to).is_ok(), expected, "{from:?} -> {to:?}");
            }
        }
    }

    #[test]
    fn labels_round_trip() {
        for m in AgentMode::ALL {
            assert_eq!(m.label().parse::<AgentMode>().unwrap(), m);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let p = DisorientationParams::<f32>::default();
        let g = disorientation(1.0f32, &p).unwrap();
        assert!((g - 0.632_120_6).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn disorientation_is_monotone_and_bounded(a in 0.0f64..50.0, b in 0.0f64..50.0, d0 in 0.01f64..10.0) {
            let p = params(d0, 0.4);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let glo = disorientation(lo, &p).unwrap();
            let ghi = disorientation(hi, &p).unwrap();
            prop_assert!(glo <= ghi);
            prop_assert!((0.0..=1.0).contains(&glo));
            prop_assert!(ghi < 1.0 || hi > 30.0 * d0);
        }

        #[test]
        fn half_disorientation_at_ln2(d0 in 1e-3f64..1e3) {
            let p = params(d0, 0.4);
            let g = disorientation(d0 * std::f64::consts::LN_2, &p).unwrap();
            prop_assert!((g - 0.5).abs() < 1e-12);
        }

        #[test]
        fn productive_only_when_not_lost(idx in 0usize..4, gamma in 0.0f64..1.0) {
            let p = params(1.0, 0.4);
            let mode = AgentMode::ALL[idx];
            let pi = productivity(mode, gamma, &p);
            prop_assert!(pi <= 1);
            if pi == 1 {
                prop_assert_eq!(mode, AgentMode::DrNotLost);
                prop_assert!(!is_lost(gamma, &p));
            }
        }

        #[test]
        fn correction_then_not_lost(err in 0.0f64..100.0, d0 in 0.01f64..10.0, th in 0.01f64..0.99) {
            let p = params(d0, th);
            let c = PoseCorrection { p_pl: [0.0; 3], p_rel: [1.0, 0.0, 0.0] };
            if let CorrectionOutcome::Corrected { error, mode, .. } = apply_correction(AgentMode::DrLost, err, AgentMode::Pl, &c) {
                prop_assert!(!is_lost(disorientation(error, &p).unwrap(), &p));
                prop_assert_eq!(mode, AgentMode::DrNotLost);
            } else {
                prop_assert!(false);
            }
        }
    }
}
