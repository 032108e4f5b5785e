//! Per-agent state machine shared by the well-mixed and spatial simulators.
//!
//! Time is counted in integer steps of a fixed `dt`. Each agent owns a decision stream
//! and, for drift-based loss, a drift stream; see [`crate::rng`].

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::deadreckoning::DriftProcess;
use crate::error::{Error, Result};
use crate::mode::{apply_correction, disorientation, is_lost, AgentMode, DisorientationParams, PoseCorrection};
use crate::rng::{stream_rng, Stream};

/// How a dead reckoner becomes lost.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossModel {
    /// Lost exactly `tau_lost` seconds after the last reset.
    Deterministic { tau_lost: f64 },
    /// Lost with probability `1 − exp(−r_lost·dt)` per step.
    Exponential { r_lost: f64 },
    /// Lost once the synthetic drift pushes `γ` above the threshold.
    Drift { sigma: f64 },
}

impl Default for LossModel {
    fn default() -> Self {
        LossModel::Deterministic { tau_lost: 3.46 }
    }
}

/// Which dead reckoners accept a correction from a perfect localizer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Collaboration {
    /// Only lost dead reckoners.
    Basic,
    /// Any dead reckoner.
    #[default]
    Smart,
}

impl Collaboration {
    pub fn label(self) -> &'static str {
        match self {
            Collaboration::Basic => "basic",
            Collaboration::Smart => "smart",
        }
    }

    fn accepts(self, receiver: AgentMode) -> bool {
        match self {
            Collaboration::Basic => receiver == AgentMode::DrLost,
            Collaboration::Smart => receiver.is_dead_reckoner(),
        }
    }
}

impl fmt::Display for Collaboration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Collaboration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Ok(Collaboration::Basic),
            "smart" => Ok(Collaboration::Smart),
            other => Err(Error::Domain(format!("unknown collaboration `{other}`"))),
        }
    }
}

/// A logged pairwise meeting, `id_a < id_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteractionEvent {
    pub t: f64,
    pub id_a: u32,
    pub id_b: u32,
    /// One side was a dead reckoner and the other a localizer (`PL` or `PL†`).
    pub effective: bool,
}

/// Error source driving loss.
#[derive(Clone, Debug)]
pub enum LossProcess {
    Deterministic {
        steps: u64,
    },
    Exponential {
        steps_per_unit: f64,
        loss_after: u64,
    },
    Drift(Box<DriftProcess>),
    /// Raw dead-reckoning offset sampled on the step grid, `(arc, z)` in metres.
    Recorded {
        signal: Arc<[[f64; 2]]>,
        reference: [f64; 2],
        cursor: usize,
    },
}

impl LossProcess {
    /// Builds the process for agent `id`. Drift draws from the agent's drift stream.
    pub fn from_model(model: LossModel, dt: f64, id: u32, seed: u64) -> Self {
        match model {
            LossModel::Deterministic { tau_lost } => LossProcess::Deterministic {
                steps: steps_for(tau_lost, dt),
            },
            LossModel::Exponential { r_lost } => LossProcess::Exponential {
                steps_per_unit: 1.0 / (r_lost * dt),
                loss_after: u64::MAX,
            },
            LossModel::Drift { sigma } => {
                LossProcess::Drift(Box::new(DriftProcess::new(sigma, stream_rng(seed, Stream::Drift(id)))))
            }
        }
    }

    pub fn recorded(signal: Arc<[[f64; 2]]>) -> Self {
        let reference = signal.first().copied().unwrap_or([0.0; 2]);
        LossProcess::Recorded {
            signal,
            reference,
            cursor: 0,
        }
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) {
        match self {
            LossProcess::Deterministic { .. } => {}
            // Per-step Bernoulli loss has a geometric waiting time; drawing it once per
            // reset gives the same law with one draw instead of one per step.
            LossProcess::Exponential {
                steps_per_unit,
                loss_after,
            } => {
                let e: f64 = rng.sample(Exp1);
                let k = (e * *steps_per_unit).floor();
                *loss_after = if k.is_finite() && k < (u64::MAX - 1) as f64 {
                    k as u64 + 1
                } else {
                    u64::MAX
                };
            }
            LossProcess::Drift(d) => d.reset(),
            LossProcess::Recorded {
                signal,
                reference,
                cursor,
            } => {
                *reference = signal.get(*cursor).copied().unwrap_or(*reference);
            }
        }
    }

    fn advance(&mut self, dt: f64) {
        match self {
            LossProcess::Drift(d) => d.advance(dt),
            LossProcess::Recorded { signal, cursor, .. } if *cursor + 1 < signal.len() => *cursor += 1,
            _ => {}
        }
    }

    fn clock_limit(&self) -> Option<u64> {
        match self {
            LossProcess::Deterministic { steps } => Some(*steps),
            LossProcess::Exponential { loss_after, .. } => Some(*loss_after),
            _ => None,
        }
    }

    /// Error magnitude since the last reset. Clock models report a linear ramp that
    /// reaches the threshold error at the scheduled loss.
    fn magnitude(&self, since_reset: u64, params: &DisorientationParams<f64>) -> f64 {
        match self {
            LossProcess::Drift(d) => d.magnitude(),
            LossProcess::Recorded {
                signal,
                reference,
                cursor,
            } => {
                let now = signal.get(*cursor).copied().unwrap_or(*reference);
                (now[0] - reference[0]).hypot(now[1] - reference[1])
            }
            _ => {
                let limit = self.clock_limit().unwrap_or(u64::MAX);
                if limit == 0 || limit == u64::MAX {
                    0.0
                } else {
                    params.threshold_error() * since_reset as f64 / limit as f64
                }
            }
        }
    }
}

/// Number of whole steps in `duration`, tolerant to representation error.
pub fn steps_for(duration: f64, dt: f64) -> u64 {
    if !duration.is_finite() {
        return u64::MAX;
    }
    let ratio = duration / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u64
    } else {
        ratio.ceil() as u64
    }
}

#[derive(Clone, Debug)]
pub struct Agent {
    id: u32,
    mode: AgentMode,
    disorientation: DisorientationParams<f64>,
    since_reset: u64,
    dagger_steps: u64,
    loss: LossProcess,
    window: VecDeque<u64>,
    rng: ChaCha8Rng,
}

impl Agent {
    pub fn new(
        id: u32,
        mode: AgentMode,
        loss: LossProcess,
        disorientation: DisorientationParams<f64>,
        seed: u64,
    ) -> Self {
        let mut agent = Self {
            id,
            mode,
            disorientation,
            since_reset: 0,
            dagger_steps: 0,
            loss,
            window: VecDeque::new(),
            rng: stream_rng(seed, Stream::Decisions(id)),
        };
        agent.loss.reset(&mut agent.rng);
        agent
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn mode(&self) -> AgentMode {
        self.mode
    }

    pub fn disorientation_params(&self) -> &DisorientationParams<f64> {
        &self.disorientation
    }

    /// Time since the last correction or reset.
    pub fn lost_timer(&self, dt: f64) -> f64 {
        self.since_reset as f64 * dt
    }

    pub fn pl_dagger_timer(&self, dt: f64) -> f64 {
        if self.mode == AgentMode::PlDagger {
            self.dagger_steps as f64 * dt
        } else {
            0.0
        }
    }

    /// Localization error. Localizer roles carry none.
    pub fn error_magnitude(&self) -> f64 {
        if self.mode.is_dead_reckoner() {
            self.loss.magnitude(self.since_reset, &self.disorientation)
        } else {
            0.0
        }
    }

    pub fn gamma(&self) -> f64 {
        disorientation(self.error_magnitude(), &self.disorientation).unwrap_or(1.0)
    }

    pub fn is_productive(&self) -> bool {
        self.mode.productivity() == 1
    }

    /// Start-of-step bookkeeping: loss of a dead reckoner and completion of re-localization.
    pub fn classify(&mut self, tau_p_steps: u64) {
        match self.mode {
            AgentMode::DrNotLost => {
                let lost = match self.loss.clock_limit() {
                    Some(limit) => self.since_reset >= limit,
                    None => is_lost(self.gamma(), &self.disorientation),
                };
                if lost {
                    self.set_mode(AgentMode::DrLost);
                }
            }
            AgentMode::PlDagger if self.dagger_steps >= tau_p_steps => self.set_mode(AgentMode::Pl),
            _ => {}
        }
    }

    /// Resets the dead-reckoning error to zero and marks the agent not lost.
    pub fn correct(&mut self) {
        if self.mode == AgentMode::DrLost {
            self.set_mode(AgentMode::DrNotLost);
        }
        self.reset_error();
    }

    fn reset_error(&mut self) {
        self.since_reset = 0;
        self.loss.reset(&mut self.rng);
    }

    fn set_mode(&mut self, to: AgentMode) {
        self.mode = self
            .mode
            .transition(to)
            .expect("simulators only request transitions of the state machine");
    }

    pub fn record_effective(&mut self, step: u64) {
        self.window.push_back(step);
    }

    /// Effective interactions in `(step − window_steps, step]` divided by the window length.
    pub fn estimate_rate(&mut self, step: u64, window_steps: u64, dt: f64) -> f64 {
        while self.window.front().is_some_and(|&s| s + window_steps <= step) {
            self.window.pop_front();
        }
        self.window.len() as f64 / (window_steps as f64 * dt)
    }

    /// Bernoulli mode switch with probability `1 − exp(−r_ms·dt)`.
    /// Only lost dead reckoners and perfect localizers draw.
    pub fn decide_switch(&mut self, r_ms: f64, dt: f64) -> Option<AgentMode> {
        if !matches!(self.mode, AgentMode::DrLost | AgentMode::Pl) {
            return None;
        }
        let p = -(-r_ms * dt).exp_m1();
        let u: f64 = self.rng.random();
        if u >= p {
            return None;
        }
        match self.mode {
            AgentMode::DrLost => {
                self.set_mode(AgentMode::PlDagger);
                self.dagger_steps = 0;
            }
            _ => {
                self.set_mode(AgentMode::DrNotLost);
                self.reset_error();
            }
        }
        Some(self.mode)
    }

    /// End-of-step time advance.
    pub fn advance(&mut self, dt: f64) {
        self.since_reset = self.since_reset.saturating_add(1);
        if self.mode == AgentMode::PlDagger {
            self.dagger_steps += 1;
        }
        self.loss.advance(dt);
    }
}

/// Outcome of one pairwise meeting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Interaction {
    pub effective: bool,
    pub corrected: Option<u32>,
}

/// Meeting between two distinct agents at `step`.
pub fn interact(a: &mut Agent, b: &mut Agent, collaboration: Collaboration, step: u64) -> Interaction {
    debug_assert_ne!(a.id, b.id);
    let effective = (a.mode.is_dead_reckoner() && !b.mode.is_dead_reckoner())
        || (b.mode.is_dead_reckoner() && !a.mode.is_dead_reckoner());
    let mut outcome = Interaction {
        effective,
        corrected: None,
    };
    if effective {
        a.record_effective(step);
        b.record_effective(step);
    }
    let pose = PoseCorrection {
        p_pl: [0.0; 3],
        p_rel: [0.0; 3],
    };
    let accepts = |receiver: &Agent, partner: &Agent| {
        collaboration.accepts(receiver.mode)
            && apply_correction(receiver.mode, receiver.error_magnitude(), partner.mode, &pose).is_corrected()
    };
    if accepts(a, b) {
        a.correct();
        outcome.corrected = Some(a.id);
    } else if accepts(b, a) {
        b.correct();
        outcome.corrected = Some(b.id);
    }
    outcome
}

/// Two distinct mutable elements of a slice.
pub(crate) fn pair_mut<T>(items: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (lo, hi) = items.split_at_mut(j);
        (&mut lo[i], &mut hi[0])
    } else {
        let (lo, hi) = items.split_at_mut(i);
        (&mut hi[0], &mut lo[j])
    }
}
