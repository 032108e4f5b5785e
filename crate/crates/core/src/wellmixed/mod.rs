//! Agent-based simulation with well-mixed pairwise interactions.
//!
//! Every `τ_int` seconds one uniformly chosen pair of distinct agents meets. Dead
//! reckoners lose localization on a clock (fixed interval or exponential) or through
//! synthetic drift; perfect localizers correct them; under collaborative switching each
//! agent sets its switching rate from its own windowed count of effective meetings.

mod run;
mod sweep;

pub use crate::agent::{interact, Agent, Collaboration, InteractionEvent, LossModel};
pub(crate) use run::{count_modes, SwitchPolicy};
pub use run::{run, OccupancySample, Recording, RunConfig, RunResult, World};
pub use sweep::{regime_label, sweep, RunSummary, RunTemplate, SweepGrid};
