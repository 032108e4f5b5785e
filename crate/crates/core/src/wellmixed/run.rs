use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{interact, pair_mut, steps_for, Agent, Collaboration, InteractionEvent, LossModel, LossProcess};
use crate::csvio::CsvRecord;
use crate::error::{Error, Result};
use crate::meanfield::adaptive_mode_switch_rate;
use crate::mode::AgentMode;
use crate::params::{ModeSwitch, SwarmParams, SwitchRule};
use crate::rng::{stream_rng, Stream};

/// What a run keeps besides the productivity totals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Recording {
    pub occupancy: bool,
    pub modes: bool,
    pub interactions: bool,
}

impl Recording {
    pub fn all() -> Self {
        Self {
            occupancy: true,
            modes: true,
            interactions: true,
        }
    }
}

/// One well-mixed run. `params.horizon` is the run length and `1/params.r_int` the
/// spacing of interaction epochs; `r_int = 0` disables interactions.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: SwarmParams<f64>,
    pub loss: LossModel,
    pub collaboration: Collaboration,
    pub initial_modes: Vec<AgentMode>,
    pub seed: u64,
    /// Window for the local interaction-rate estimate. Defaults to `2·τ_p`.
    pub tau_window: f64,
    /// Upper bound on any mode-switching rate. Defaults to `0.1/dt`.
    pub r_ms_max: f64,
    pub recording: Recording,
}

impl RunConfig {
    pub fn new(params: SwarmParams<f64>, initial_modes: Vec<AgentMode>, seed: u64) -> Self {
        Self {
            tau_window: 2.0 * params.tau_p,
            r_ms_max: 0.1 / params.dt,
            params,
            loss: LossModel::default(),
            collaboration: Collaboration::default(),
            initial_modes,
            seed,
            recording: Recording::default(),
        }
    }

    /// `n_pl` perfect localizers (ids `0..n_pl`) and not-lost dead reckoners.
    pub fn with_initial_pl(params: SwarmParams<f64>, n_pl: usize, seed: u64) -> Self {
        let modes = (0..params.n_agents)
            .map(|i| if i < n_pl { AgentMode::Pl } else { AgentMode::DrNotLost })
            .collect();
        Self::new(params, modes, seed)
    }

    pub fn with_loss(mut self, loss: LossModel) -> Self {
        self.loss = loss;
        self
    }

    pub fn with_collaboration(mut self, collaboration: Collaboration) -> Self {
        self.collaboration = collaboration;
        self
    }

    pub fn with_recording(mut self, recording: Recording) -> Self {
        self.recording = recording;
        self
    }

    pub fn tau_int(&self) -> f64 {
        1.0 / self.params.r_int
    }

    pub fn tau_total(&self) -> f64 {
        self.params.horizon
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.initial_modes.len() != self.params.n_agents {
            return Err(Error::param(
                "initial_modes",
                format!(
                    "has {} entries for {} agents",
                    self.initial_modes.len(),
                    self.params.n_agents
                ),
            ));
        }
        if self.params.n_agents > u32::MAX as usize {
            return Err(Error::param("n_agents", "too many agents"));
        }
        if !(self.params.r_int >= 0.0) {
            return Err(Error::param("r_int", "must be >= 0"));
        }
        if !(self.tau_window > 0.0) {
            return Err(Error::param("tau_window", "must be > 0"));
        }
        if !(self.r_ms_max >= 0.0) {
            return Err(Error::param("r_ms_max", "must be >= 0"));
        }
        match self.loss {
            LossModel::Deterministic { tau_lost } if !(tau_lost > 0.0) => Err(Error::param("tau_lost", "must be > 0")),
            LossModel::Exponential { r_lost } if !(r_lost >= 0.0) => Err(Error::param("r_lost", "must be >= 0")),
            LossModel::Drift { sigma } if !(sigma >= 0.0) => Err(Error::param("sigma", "must be >= 0")),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OccupancySample {
    pub t: f64,
    /// Counts in [`AgentMode::ALL`] order.
    pub counts: [u32; 4],
}

impl CsvRecord for OccupancySample {
    fn header() -> &'static [&'static str] {
        &["t", "n_notlost", "n_lost", "n_pldagger", "n_pl"]
    }

    fn fields(&self) -> Vec<String> {
        let mut out = vec![self.t.to_string()];
        out.extend(self.counts.iter().map(u32::to_string));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    /// Cumulative productivity over all agents divided by `N·τ_total`.
    pub productivity_per_agent: f64,
    pub per_agent_productivity: Vec<f64>,
    pub occupancy_series: Vec<OccupancySample>,
    /// `mode_series[k][i]`: mode of agent `i` during step `k`.
    pub mode_series: Vec<Vec<AgentMode>>,
    pub interaction_log: Vec<InteractionEvent>,
    pub dt: f64,
    pub steps: u64,
}

/// How an agent picks its switching rate each step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum SwitchPolicy {
    Never,
    Rate(f64),
    LocalEstimate { alpha: f64 },
}

impl SwitchPolicy {
    pub(crate) fn from_mode_switch(mode_switch: ModeSwitch<f64>, r_int: f64, cap: f64) -> Self {
        match mode_switch {
            ModeSwitch::Fixed { .. } => SwitchPolicy::Never,
            ModeSwitch::Individual => SwitchPolicy::Rate(cap),
            ModeSwitch::Collaborative(SwitchRule::Constant(r)) => SwitchPolicy::Rate(r.min(cap)),
            ModeSwitch::Collaborative(SwitchRule::Adaptive { alpha }) => {
                SwitchPolicy::Rate(adaptive_mode_switch_rate(r_int, alpha, cap))
            }
            ModeSwitch::Collaborative(SwitchRule::LocalEstimate { alpha }) => SwitchPolicy::LocalEstimate { alpha },
        }
    }

    /// `r_MS` for `agent` at `step`; `r̂ = 0` maps to the cap.
    pub(crate) fn rate(self, agent: &mut Agent, step: u64, window_steps: u64, dt: f64, cap: f64) -> Option<f64> {
        match self {
            SwitchPolicy::Never => None,
            SwitchPolicy::Rate(r) => Some(r),
            SwitchPolicy::LocalEstimate { alpha } => {
                let r_hat = agent.estimate_rate(step, window_steps, dt);
                Some(if r_hat > 0.0 { (alpha / r_hat).min(cap) } else { cap })
            }
        }
    }
}

pub(crate) fn count_modes<'a>(modes: impl Iterator<Item = &'a Agent>) -> [u32; 4] {
    let mut counts = [0u32; 4];
    for a in modes {
        counts[a.mode().index()] += 1;
    }
    counts
}

/// Stepwise state of a well-mixed run.
#[derive(Clone, Debug)]
pub struct World {
    agents: Vec<Agent>,
    scheduler: ChaCha8Rng,
    collaboration: Collaboration,
    policy: SwitchPolicy,
    interacts: bool,
    dt: f64,
    tau_int: f64,
    tau_p_steps: u64,
    window_steps: u64,
    r_ms_max: f64,
    recording: Recording,
    step: u64,
    next_epoch: u64,
    productive_steps: Vec<u64>,
    occupancy: Vec<OccupancySample>,
    modes: Vec<Vec<AgentMode>>,
    log: Vec<InteractionEvent>,
}

impl World {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let p = &config.params;
        let agents = config
            .initial_modes
            .iter()
            .enumerate()
            .map(|(i, &mode)| {
                let id = i as u32;
                let loss = LossProcess::from_model(config.loss, p.dt, id, config.seed);
                Agent::new(id, mode, loss, p.disorientation, config.seed)
            })
            .collect::<Vec<_>>();
        let interacts = p.mode_switch != ModeSwitch::Individual && p.n_agents >= 2 && p.r_int > 0.0;
        Ok(Self {
            productive_steps: vec![0; agents.len()],
            agents,
            scheduler: stream_rng(config.seed, Stream::Scheduler),
            collaboration: config.collaboration,
            policy: SwitchPolicy::from_mode_switch(p.mode_switch, p.r_int, config.r_ms_max),
            interacts,
            dt: p.dt,
            tau_int: 1.0 / p.r_int,
            tau_p_steps: steps_for(p.tau_p, p.dt),
            window_steps: steps_for(config.tau_window, p.dt).max(1),
            r_ms_max: config.r_ms_max,
            recording: config.recording,
            step: 0,
            next_epoch: 1,
            occupancy: Vec::new(),
            modes: Vec::new(),
            log: Vec::new(),
        })
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn counts(&self) -> [u32; 4] {
        count_modes(self.agents.iter())
    }

    /// Advances one `dt`: classify, fire due interaction epochs, decide switches,
    /// account productivity, advance clocks.
    pub fn step(&mut self) {
        let t = self.time();
        for a in &mut self.agents {
            a.classify(self.tau_p_steps);
        }

        if self.interacts {
            let n = self.agents.len();
            while (self.next_epoch as f64) * self.tau_int <= t + 1e-9 * self.dt {
                self.next_epoch += 1;
                let i = self.scheduler.random_range(0..n);
                let mut j = self.scheduler.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let (lo, hi) = (i.min(j), i.max(j));
                let (a, b) = pair_mut(&mut self.agents, lo, hi);
                let out = interact(a, b, self.collaboration, self.step);
                if self.recording.interactions {
                    self.log.push(InteractionEvent {
                        t,
                        id_a: lo as u32,
                        id_b: hi as u32,
                        effective: out.effective,
                    });
                }
            }
        }

        for a in &mut self.agents {
            if !matches!(a.mode(), AgentMode::DrLost | AgentMode::Pl) {
                continue;
            }
            if let Some(r_ms) = self
                .policy
                .rate(a, self.step, self.window_steps, self.dt, self.r_ms_max)
            {
                a.decide_switch(r_ms, self.dt);
            }
        }

        for (a, count) in self.agents.iter().zip(&mut self.productive_steps) {
            *count += u64::from(a.is_productive());
        }
        if self.recording.occupancy {
            self.occupancy.push(OccupancySample {
                t,
                counts: self.counts(),
            });
        }
        if self.recording.modes {
            self.modes.push(self.agents.iter().map(Agent::mode).collect());
        }

        for a in &mut self.agents {
            a.advance(self.dt);
        }
        self.step += 1;
    }

    pub fn finish(self) -> RunResult {
        let steps = self.step.max(1) as f64;
        let per_agent_productivity: Vec<f64> = self.productive_steps.iter().map(|&c| c as f64 / steps).collect();
        let total: u64 = self.productive_steps.iter().sum();
        RunResult {
            productivity_per_agent: total as f64 / (steps * self.agents.len().max(1) as f64),
            per_agent_productivity,
            occupancy_series: self.occupancy,
            mode_series: self.modes,
            interaction_log: self.log,
            dt: self.dt,
            steps: self.step,
        }
    }
}

pub fn run(config: &RunConfig) -> Result<RunResult> {
    let mut world = World::new(config)?;
    let steps = steps_for(config.params.horizon, config.params.dt);
    for _ in 0..steps {
        world.step();
    }
    Ok(world.finish())
}
