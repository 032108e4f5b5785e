use crate::agent::{interact, pair_mut, steps_for, Agent, Collaboration, InteractionEvent, LossModel, LossProcess};
use crate::csvio::CsvRecord;
use crate::error::{Error, Result};
use crate::mode::{AgentMode, DisorientationParams};
use crate::params::{ModeSwitch, SwitchRule};
use crate::spatial::geometry::{line_of_sight, CylinderGeometry, LosParams, SurfacePoint};
use crate::spatial::network::{network_stats, InteractionNetwork};
use crate::spatial::trajectory::TrajectorySet;
use crate::wellmixed::{count_modes, OccupancySample, RunResult, SwitchPolicy};

/// Default sensitivity in `r_MS = α / r̂_eff` for spatial runs (1/s²).
pub const SPATIAL_ALPHA: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct SpatialConfig {
    pub geometry: CylinderGeometry,
    pub los: LosParams,
    pub tau_p: f64,
    /// Defaults to `2·τ_p`.
    pub tau_window: Option<f64>,
    /// Spacing of repeat interactions while line of sight holds.
    pub tau_refresh: f64,
    pub gamma_thresh: f64,
    /// Per-robot `δp₀`; empty means 1 for every robot.
    pub delta_p0: Vec<f64>,
    /// Synthetic drift scale (m/√s), used when the trajectories carry no estimates.
    pub sigma: f64,
    pub mode_switch: ModeSwitch<f64>,
    pub collaboration: Collaboration,
    /// Defaults to `0.1/dt`.
    pub r_ms_max: Option<f64>,
    /// No interaction fires at or after this time.
    pub comm_cut: Option<f64>,
    /// Per-robot initial modes; empty means all not-lost dead reckoners.
    pub initial_modes: Vec<AgentMode>,
    pub seed: u64,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        Self {
            geometry: CylinderGeometry::default(),
            los: LosParams::default(),
            tau_p: 20.0,
            tau_window: None,
            tau_refresh: 1.0,
            gamma_thresh: 0.4,
            delta_p0: Vec::new(),
            sigma: 0.05,
            mode_switch: ModeSwitch::Collaborative(SwitchRule::LocalEstimate { alpha: SPATIAL_ALPHA }),
            collaboration: Collaboration::Smart,
            r_ms_max: None,
            comm_cut: None,
            initial_modes: Vec::new(),
            seed: 0,
        }
    }
}

impl SpatialConfig {
    pub fn tau_window(&self) -> f64 {
        self.tau_window.unwrap_or(2.0 * self.tau_p)
    }

    pub fn r_ms_max(&self, dt: f64) -> f64 {
        self.r_ms_max.unwrap_or(0.1 / dt)
    }

    pub fn disorientation(&self, index: usize) -> Result<DisorientationParams<f64>> {
        DisorientationParams::new(self.delta_p0.get(index).copied().unwrap_or(1.0), self.gamma_thresh)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpatialResult {
    /// Modes, occupancy and interaction log on the trajectory grid; event times are absolute.
    pub run: RunResult,
    pub network: InteractionNetwork,
    pub ids: Vec<u32>,
    pub t0: f64,
}

impl SpatialResult {
    /// Long-format mode series, one row per robot per step.
    pub fn mode_rows(&self) -> Vec<ModeRow> {
        let mut rows = Vec::with_capacity(self.run.mode_series.len() * self.ids.len());
        for (k, modes) in self.run.mode_series.iter().enumerate() {
            let t = self.t0 + k as f64 * self.run.dt;
            for (&robot_id, &mode) in self.ids.iter().zip(modes) {
                rows.push(ModeRow { t, robot_id, mode });
            }
        }
        rows
    }

    /// Mode series of the robot at `index`.
    pub fn modes_of(&self, index: usize) -> Vec<AgentMode> {
        self.run.mode_series.iter().map(|m| m[index]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeRow {
    pub t: f64,
    pub robot_id: u32,
    pub mode: AgentMode,
}

impl CsvRecord for ModeRow {
    fn header() -> &'static [&'static str] {
        &["t", "robot_id", "mode"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.t.to_string(),
            self.robot_id.to_string(),
            self.mode.label().to_string(),
        ]
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Contact {
    active: bool,
    last_fired: u64,
}

/// Simulates the robots along `trajectories`.
///
/// Per step: classify, fire interactions for pairs in line of sight (new contacts and
/// every `τ_refresh` of continued contact), decide mode switches, account productivity,
/// then advance drift. Mode series, occupancy and the interaction log are always kept.
pub fn run_spatial(trajectories: &TrajectorySet, config: &SpatialConfig) -> Result<SpatialResult> {
    config.geometry.validate()?;
    let n = trajectories.n_robots();
    let dt = trajectories.dt;
    if n == 0 {
        return Err(Error::Input {
            row: 0,
            reason: "no robots".into(),
        });
    }
    if trajectories.poses.iter().any(|p| p.len() != trajectories.steps()) {
        return Err(Error::Input {
            row: 0,
            reason: "trajectories are not on a common grid".into(),
        });
    }
    if !config.delta_p0.is_empty() && config.delta_p0.len() != n {
        return Err(Error::Input {
            row: 0,
            reason: format!("{} delta_p0 values for {n} robots", config.delta_p0.len()),
        });
    }
    if !config.initial_modes.is_empty() && config.initial_modes.len() != n {
        return Err(Error::Input {
            row: 0,
            reason: format!("{} initial modes for {n} robots", config.initial_modes.len()),
        });
    }
    if let Some(d) = &trajectories.drift {
        if d.len() != n || d.iter().any(|s| s.len() != trajectories.steps()) {
            return Err(Error::Input {
                row: 0,
                reason: "recorded estimates do not match the trajectories".into(),
            });
        }
    }
    if !(config.tau_p > 0.0) || !(config.tau_refresh > 0.0) || !(config.tau_window() > 0.0) {
        return Err(Error::param("tau_p", "tau_p, tau_window and tau_refresh must be > 0"));
    }
    if !(config.sigma >= 0.0) {
        return Err(Error::param("sigma", "must be >= 0"));
    }

    let mut agents = (0..n)
        .map(|i| {
            let id = i as u32;
            let loss = match &trajectories.drift {
                Some(d) => LossProcess::recorded(d[i].clone()),
                None => LossProcess::from_model(LossModel::Drift { sigma: config.sigma }, dt, id, config.seed),
            };
            let mode = config.initial_modes.get(i).copied().unwrap_or(AgentMode::DrNotLost);
            Ok(Agent::new(id, mode, loss, config.disorientation(i)?, config.seed))
        })
        .collect::<Result<Vec<_>>>()?;

    let cap = config.r_ms_max(dt);
    let policy = SwitchPolicy::from_mode_switch(config.mode_switch, 0.0, cap);
    let interacts = config.mode_switch != ModeSwitch::Individual;
    let tau_p_steps = steps_for(config.tau_p, dt);
    let window_steps = steps_for(config.tau_window(), dt).max(1);
    let refresh_steps = steps_for(config.tau_refresh, dt).max(1);
    let steps = trajectories.steps();

    let mut contacts = vec![Contact::default(); n * n];
    let mut productive = vec![0u64; n];
    let mut modes = Vec::with_capacity(steps);
    let mut occupancy = Vec::with_capacity(steps);
    let mut log = Vec::new();
    let mut here: Vec<SurfacePoint> = Vec::with_capacity(n);
    let mut others: Vec<SurfacePoint> = Vec::with_capacity(n);

    for k in 0..steps {
        let t = trajectories.time(k);
        let step = k as u64;
        for a in &mut agents {
            a.classify(tau_p_steps);
        }

        here.clear();
        here.extend(trajectories.poses.iter().map(|p| p[k]));
        let comm = interacts && config.comm_cut.is_none_or(|c| t < c);
        for i in 0..n {
            for j in i + 1..n {
                let contact = &mut contacts[i * n + j];
                others.clear();
                others.extend(
                    here.iter()
                        .enumerate()
                        .filter(|&(m, _)| m != i && m != j)
                        .map(|(_, p)| *p),
                );
                if !line_of_sight(here[i], here[j], &others, &config.geometry, &config.los) {
                    contact.active = false;
                    continue;
                }
                let fire = !contact.active || step - contact.last_fired >= refresh_steps;
                contact.active = true;
                if !fire {
                    continue;
                }
                contact.last_fired = step;
                if !comm {
                    continue;
                }
                let (a, b) = pair_mut(&mut agents, i, j);
                let out = interact(a, b, config.collaboration, step);
                log.push(InteractionEvent {
                    t,
                    id_a: trajectories.ids[i],
                    id_b: trajectories.ids[j],
                    effective: out.effective,
                });
            }
        }

        for a in &mut agents {
            if !matches!(a.mode(), AgentMode::DrLost | AgentMode::Pl) {
                continue;
            }
            if let Some(r_ms) = policy.rate(a, step, window_steps, dt, cap) {
                a.decide_switch(r_ms, dt);
            }
        }

        for (a, c) in agents.iter().zip(&mut productive) {
            *c += u64::from(a.is_productive());
        }
        occupancy.push(OccupancySample {
            t,
            counts: count_modes(agents.iter()),
        });
        modes.push(agents.iter().map(Agent::mode).collect());

        for a in &mut agents {
            a.advance(dt);
        }
    }

    let denom = steps.max(1) as f64;
    let total: u64 = productive.iter().sum();
    let window = (trajectories.t0, trajectories.time(steps.saturating_sub(1)));
    let network = network_stats(&log, &trajectories.ids, window).network;
    Ok(SpatialResult {
        run: RunResult {
            productivity_per_agent: total as f64 / (denom * n as f64),
            per_agent_productivity: productive.iter().map(|&c| c as f64 / denom).collect(),
            occupancy_series: occupancy,
            mode_series: modes,
            interaction_log: log,
            dt,
            steps: steps as u64,
        },
        network,
        ids: trajectories.ids.clone(),
        t0: trajectories.t0,
    })
}
