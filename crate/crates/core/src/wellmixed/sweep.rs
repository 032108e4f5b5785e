use rayon::prelude::*;

use crate::agent::{Collaboration, LossModel};
use crate::csvio::CsvRecord;
use crate::error::Result;
use crate::params::{ModeSwitch, SwarmParams};
use crate::wellmixed::{run, RunConfig};

/// Everything about a run except the swept coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTemplate {
    pub params: SwarmParams<f64>,
    pub loss: LossModel,
    pub collaboration: Collaboration,
    pub tau_window: Option<f64>,
    pub r_ms_max: Option<f64>,
}

impl RunTemplate {
    pub fn new(params: SwarmParams<f64>, loss: LossModel, collaboration: Collaboration) -> Self {
        Self {
            params,
            loss,
            collaboration,
            tau_window: None,
            r_ms_max: None,
        }
    }

    /// Config with `round(fraction·N)` initial perfect localizers.
    pub fn config(&self, r_int: f64, initial_fraction: f64, seed: u64) -> RunConfig {
        let n = self.params.n_agents;
        let n_pl = ((initial_fraction * n as f64).round().max(0.0) as usize).min(n);
        let mut params = SwarmParams { r_int, ..self.params };
        if let ModeSwitch::Fixed { .. } = params.mode_switch {
            params.mode_switch = ModeSwitch::Fixed { n_pl };
        }
        let mut cfg = RunConfig::with_initial_pl(params, n_pl, seed)
            .with_loss(self.loss)
            .with_collaboration(self.collaboration);
        if let Some(w) = self.tau_window {
            cfg.tau_window = w;
        }
        if let Some(cap) = self.r_ms_max {
            cfg.r_ms_max = cap;
        }
        cfg
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepGrid {
    pub r_int: Vec<f64>,
    pub initial_fraction: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl SweepGrid {
    /// Jobs in `r_int`-major, then fraction, then seed order.
    pub fn jobs(&self) -> Vec<(f64, f64, u64)> {
        let mut out = Vec::with_capacity(self.r_int.len() * self.initial_fraction.len() * self.seeds.len());
        for &r in &self.r_int {
            for &f in &self.initial_fraction {
                for &s in &self.seeds {
                    out.push((r, f, s));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub regime: &'static str,
    pub r_int: f64,
    pub initial_fraction: f64,
    pub collaboration: Collaboration,
    pub productivity: f64,
}

impl CsvRecord for RunSummary {
    fn header() -> &'static [&'static str] {
        &[
            "seed",
            "regime",
            "r_int",
            "initial_fraction",
            "collaboration",
            "productivity",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            self.regime.to_string(),
            self.r_int.to_string(),
            self.initial_fraction.to_string(),
            self.collaboration.to_string(),
            self.productivity.to_string(),
        ]
    }
}

pub fn regime_label<T>(mode_switch: &ModeSwitch<T>) -> &'static str {
    match mode_switch {
        ModeSwitch::Fixed { .. } => "fixed",
        ModeSwitch::Individual => "individual",
        ModeSwitch::Collaborative(_) => "collaborative",
    }
}

/// Runs every job in parallel; the output order is the job order whatever the scheduling.
pub fn sweep(template: &RunTemplate, grid: &SweepGrid) -> Result<Vec<RunSummary>> {
    grid.jobs()
        .into_par_iter()
        .map(|(r_int, fraction, seed)| {
            let result = run(&template.config(r_int, fraction, seed))?;
            Ok(RunSummary {
                seed,
                regime: regime_label(&template.params.mode_switch),
                r_int,
                initial_fraction: fraction,
                collaboration: template.collaboration,
                productivity: result.productivity_per_agent,
            })
        })
        .collect()
}
