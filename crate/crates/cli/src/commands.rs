//! Layer commands: build the runs from a resolved config, write CSVs, summarize.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use swarm_sacrifice::csvio::{reader, write_csv, CsvRecord};
use swarm_sacrifice::meanfield::{
    adaptive_mode_switch_rate, fixed_productivity, mean_field_rate_cap, optimal_pl_fraction,
    steady_state_collaborative, steady_state_fixed, steady_state_individual, Regime, SweepRow,
};
use swarm_sacrifice::spatial::{
    read_trajectories, run_spatial, scenario_coverage, scenario_formation, CoverageParams, CylinderGeometry,
    FormationParams, LosParams, SpatialConfig, TrajectorySet, WalkParams,
};
use swarm_sacrifice::wellmixed::{regime_label, run, Collaboration, LossModel, RunSummary, RunTemplate, SweepGrid};
use swarm_sacrifice::{AgentMode, DisorientationParams, ModeSwitch, SwarmParams, SwitchRule};

use crate::config::{CollaborationSpec, ExperimentConfig, Layer, LossKind, RegimeKind, ScenarioKind, SwitchRuleKind};

pub const MEANFIELD_FILE: &str = "meanfield.csv";
pub const WELLMIXED_FILE: &str = "wellmixed.csv";
pub const SPATIAL_FILE: &str = "spatial.csv";

/// Files written and the printed summary lines.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

pub fn execute(layer: Layer, config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome> {
    let c = config.resolved(layer)?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    match layer {
        Layer::Meanfield => cmd_meanfield(&c, out_dir),
        Layer::Wellmixed => cmd_wellmixed(&c, out_dir),
        Layer::Spatial => cmd_spatial(&c, out_dir),
    }
}

fn header(c: &ExperimentConfig) -> Result<Vec<String>> {
    Ok(vec![
        format!("swarm-sacrifice {}", env!("CARGO_PKG_VERSION")),
        format!("config {}", serde_json::to_string(c)?),
        format!("seed {}", c.seed),
    ])
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic<R: CsvRecord>(path: &Path, comments: &[String], rows: &[R]) -> Result<PathBuf> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write_csv(&mut w, comments, rows)?;
        w.flush()?;
    }
    tmp.persist(path)
        .map_err(|e| anyhow!("cannot write {}: {}", path.display(), e.error))?;
    Ok(path.to_path_buf())
}

/// One line per group, in order of first appearance: count, mean, min and max.
pub fn summarize(items: impl IntoIterator<Item = (String, f64)>) -> Vec<String> {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for (key, v) in items {
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, vals)) => vals.push(v),
            None => groups.push((key, vec![v])),
        }
    }
    groups
        .into_iter()
        .map(|(key, vals)| {
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            format!("{key}: n={} mean={mean} min={min} max={max}", vals.len())
        })
        .collect()
}

/// Rebuilds the summary of a layer from its main CSV.
pub fn summary_from_csv(layer: Layer, path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut r = reader(file);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{} has no `{name}` column", path.display()))
    };
    let value = col("productivity")?;
    let keys: Vec<usize> = match layer {
        Layer::Meanfield => vec![col("regime")?],
        Layer::Wellmixed => vec![col("regime")?, col("collaboration")?],
        Layer::Spatial => vec![col("collaboration")?],
    };
    let mut items = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let key = keys.iter().map(|&k| &rec[k]).collect::<Vec<_>>().join("/");
        items.push((key, rec[value].parse::<f64>()?));
    }
    Ok(summarize(items))
}

fn base_params(c: &ExperimentConfig, r_int: f64) -> Result<SwarmParams<f64>> {
    let mut p = SwarmParams::fixed(c.n_agents.unwrap_or(30), 0, c.r_lost, r_int)
        .with_tau_p(c.tau_p.unwrap_or(10.0))
        .with_horizon(c.horizon.unwrap_or(200.0))
        .with_dt(c.dt.unwrap_or(0.01));
    p.disorientation = DisorientationParams::new(c.delta_p0[0], c.gamma_thresh)?;
    Ok(p)
}

fn check_cell(p: SwarmParams<f64>, cell: impl FnOnce() -> String) -> Result<SwarmParams<f64>> {
    p.validate().with_context(|| format!("grid cell {}", cell()))?;
    Ok(p)
}

fn meanfield_rows(c: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let r_ints = c.r_int.as_ref().expect("resolved").expand("r_int")?;
    let alpha = c.alpha.expect("resolved");
    let tau_p = c.tau_p.expect("resolved");
    let regimes = match c.regime {
        Some(r) => vec![r],
        None => vec![RegimeKind::Fixed, RegimeKind::Individual, RegimeKind::Collaborative],
    };
    let mut rows = Vec::new();
    let row = |regime, p: &SwarmParams<f64>, extra: Option<f64>, r_ms, productivity, stable| SweepRow {
        regime,
        n_agents: p.n_agents,
        r_lost: p.r_lost,
        r_int: p.r_int,
        n_pl_or_alpha: extra,
        r_ms,
        productivity,
        stable,
    };
    for regime in regimes {
        match regime {
            RegimeKind::Fixed => {
                for n_pl in c.n_pl.as_ref().expect("resolved").expand("n_pl")? {
                    for &r_int in &r_ints {
                        let p = check_cell(
                            base_params(c, r_int)?.with_mode_switch(ModeSwitch::Fixed { n_pl: n_pl as usize }),
                            || format!("n_pl={n_pl}, r_int={r_int}"),
                        )?;
                        let rep =
                            steady_state_fixed(&p).with_context(|| format!("grid cell n_pl={n_pl}, r_int={r_int}"))?;
                        rows.push(row(
                            Regime::Fixed,
                            &p,
                            Some(n_pl),
                            None,
                            rep.productivity_per_agent,
                            rep.stable,
                        ));
                    }
                }
                for &r_int in &r_ints {
                    let p = check_cell(base_params(c, r_int)?, || format!("r_int={r_int}"))?;
                    let f = optimal_pl_fraction(&p).with_context(|| format!("grid cell r_int={r_int}"))?;
                    let prod = fixed_productivity(p.n_agents, p.r_lost, r_int, f);
                    // The lost count relaxes at r_L + k·N_PL, positive for any f > 0.
                    let stable = p.r_lost + p.pair_coefficient()? * f * p.n() > 0.0;
                    rows.push(row(Regime::FixedOptimal, &p, Some(f * p.n()), None, prod, stable));
                }
            }
            RegimeKind::Individual => {
                for &r_int in &r_ints {
                    let p = check_cell(base_params(c, r_int)?.with_mode_switch(ModeSwitch::Individual), || {
                        format!("r_int={r_int}")
                    })?;
                    let rep = steady_state_individual(&p).with_context(|| format!("grid cell r_int={r_int}"))?;
                    rows.push(row(
                        Regime::Individual,
                        &p,
                        None,
                        None,
                        rep.productivity_per_agent,
                        rep.stable,
                    ));
                }
            }
            RegimeKind::Collaborative => {
                for &r_int in &r_ints {
                    let p = check_cell(base_params(c, r_int)?, || format!("r_int={r_int}"))?;
                    if let Some(grid) = &c.r_ms {
                        for r_ms in grid.expand("r_ms")? {
                            let p = p.with_mode_switch(ModeSwitch::Collaborative(SwitchRule::Constant(r_ms)));
                            let rep = steady_state_collaborative(&p, r_ms)
                                .with_context(|| format!("grid cell r_int={r_int}, r_ms={r_ms}"))?;
                            rows.push(row(
                                Regime::Collaborative,
                                &p,
                                None,
                                Some(r_ms),
                                rep.productivity_per_agent,
                                rep.stable,
                            ));
                        }
                    }
                    let r_ms = adaptive_mode_switch_rate(r_int, alpha, mean_field_rate_cap(tau_p));
                    let p = p.with_mode_switch(ModeSwitch::Collaborative(SwitchRule::Adaptive { alpha }));
                    let rep = steady_state_collaborative(&p, r_ms)
                        .with_context(|| format!("grid cell r_int={r_int}, alpha={alpha}"))?;
                    rows.push(row(
                        Regime::Adaptive,
                        &p,
                        Some(alpha),
                        Some(r_ms),
                        rep.productivity_per_agent,
                        rep.stable,
                    ));
                }
            }
        }
    }
    Ok(rows)
}

fn cmd_meanfield(c: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let rows = meanfield_rows(c)?;
    let file = write_atomic(&out.join(MEANFIELD_FILE), &header(c)?, &rows)?;
    Ok(Outcome {
        files: vec![file],
        summary: summarize(rows.iter().map(|r| (r.regime.label().to_string(), r.productivity))),
    })
}

fn collaborations(spec: CollaborationSpec) -> Vec<Collaboration> {
    match spec {
        CollaborationSpec::Basic => vec![Collaboration::Basic],
        CollaborationSpec::Smart => vec![Collaboration::Smart],
        CollaborationSpec::Both => vec![Collaboration::Basic, Collaboration::Smart],
    }
}

fn single_r_ms(c: &ExperimentConfig) -> Result<f64> {
    let values = c
        .r_ms
        .as_ref()
        .ok_or_else(|| anyhow!("`switch_rule` = constant needs `r_ms`"))?
        .expand("r_ms")?;
    match values[..] {
        [r] => Ok(r),
        _ => bail!("`r_ms`: the simulators take one constant rate, got {}", values.len()),
    }
}

fn sim_mode_switch(c: &ExperimentConfig) -> Result<ModeSwitch<f64>> {
    let alpha = c.alpha.expect("resolved");
    Ok(match c.regime.expect("resolved") {
        RegimeKind::Fixed => ModeSwitch::Fixed { n_pl: 0 },
        RegimeKind::Individual => ModeSwitch::Individual,
        RegimeKind::Collaborative => ModeSwitch::Collaborative(match c.switch_rule.expect("resolved") {
            SwitchRuleKind::Constant => SwitchRule::Constant(single_r_ms(c)?),
            SwitchRuleKind::Adaptive => SwitchRule::Adaptive { alpha },
            SwitchRuleKind::Local => SwitchRule::LocalEstimate { alpha },
        }),
    })
}

fn cmd_wellmixed(c: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let params = base_params(c, 1.0)?.with_mode_switch(sim_mode_switch(c)?);
    let loss = match c.loss.expect("resolved") {
        LossKind::Deterministic => LossModel::Deterministic { tau_lost: c.tau_lost },
        LossKind::Exponential => LossModel::Exponential { r_lost: c.r_lost },
        LossKind::Drift => LossModel::Drift {
            sigma: c.sigma.expect("resolved"),
        },
    };
    let runs = c.runs.expect("resolved") as u64;
    let grid = SweepGrid {
        r_int: c.r_int.as_ref().expect("resolved").expand("r_int")?,
        initial_fraction: c
            .initial_fraction
            .as_ref()
            .expect("resolved")
            .expand("initial_fraction")?,
        seeds: (c.seed..c.seed + runs).collect(),
    };
    let mut jobs = Vec::new();
    for collaboration in collaborations(c.collaboration.expect("resolved")) {
        let mut template = RunTemplate::new(params, loss, collaboration);
        template.tau_window = c.tau_window;
        template.r_ms_max = c.r_ms_max;
        for (r_int, fraction, seed) in grid.jobs() {
            let mut cfg = template.config(r_int, fraction, seed);
            cfg.validate()
                .with_context(|| format!("grid cell r_int={r_int}, initial_fraction={fraction}, seed={seed}"))?;
            cfg.recording.occupancy = c.record_occupancy;
            jobs.push((collaboration, r_int, fraction, seed, cfg));
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(_, _, _, _, cfg)| run(cfg))
        .collect::<swarm_sacrifice::Result<_>>()?;

    let head = header(c)?;
    let mut files = Vec::new();
    let mut rows = Vec::with_capacity(jobs.len());
    for (i, ((collaboration, r_int, fraction, seed, _), result)) in jobs.iter().zip(&results).enumerate() {
        rows.push(RunSummary {
            seed: *seed,
            regime: regime_label(&params.mode_switch),
            r_int: *r_int,
            initial_fraction: *fraction,
            collaboration: *collaboration,
            productivity: result.productivity_per_agent,
        });
        if c.record_occupancy {
            let mut comments = head.clone();
            comments.push(format!(
                "run {i}: collaboration={collaboration} r_int={r_int} initial_fraction={fraction} seed={seed}"
            ));
            let path = out.join("occupancy").join(format!("run{i}.csv"));
            files.push(write_atomic(&path, &comments, &result.occupancy_series)?);
        }
    }
    files.insert(0, write_atomic(&out.join(WELLMIXED_FILE), &head, &rows)?);
    Ok(Outcome {
        files,
        summary: summarize(
            rows.iter()
                .map(|r| (format!("{}/{}", r.regime, r.collaboration), r.productivity)),
        ),
    })
}

/// Per-robot productivity of one spatial run.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotRow {
    pub collaboration: Collaboration,
    pub run: usize,
    pub seed: u64,
    pub robot_id: u32,
    pub productivity: f64,
}

impl CsvRecord for RobotRow {
    fn header() -> &'static [&'static str] {
        &["collaboration", "run", "seed", "robot_id", "productivity"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.collaboration.to_string(),
            self.run.to_string(),
            self.seed.to_string(),
            self.robot_id.to_string(),
            self.productivity.to_string(),
        ]
    }
}

fn spatial_sets(c: &ExperimentConfig) -> Result<(Vec<TrajectorySet>, Vec<f64>)> {
    let geometry = CylinderGeometry::new(c.radius.expect("resolved"), c.height.expect("resolved"))?;
    let dt = c.dt.expect("resolved");
    let walk = WalkParams {
        speed: c.speed.expect("resolved"),
        heading_diffusion: c.heading_diffusion.expect("resolved"),
        dt,
    };
    let duration = c.horizon.expect("resolved");
    let runs = c.runs.expect("resolved");
    let (sets, n) = match c.scenario.expect("resolved") {
        ScenarioKind::Formation => {
            let offsets = FormationParams::default().offsets;
            let n = offsets.len();
            let scenario = scenario_formation(&FormationParams {
                geometry,
                walk,
                duration,
                offsets,
                delta_p0: per_robot(&c.delta_p0, n)?,
                seed: c.seed,
            })?;
            (vec![scenario.set; runs], n)
        }
        ScenarioKind::Coverage => {
            let n = c.n_agents.expect("resolved");
            let sets = scenario_coverage(&CoverageParams {
                geometry,
                walk,
                duration,
                n_robots: n,
                n_runs: runs,
                base_seed: c.seed,
            })?;
            (sets, n)
        }
        ScenarioKind::File => {
            let path = c.trajectory_file.as_ref().expect("resolved");
            let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            let frames = read_trajectories(file).with_context(|| format!("in {}", path.display()))?;
            let set = TrajectorySet::from_frames(&frames, dt, &geometry)?;
            let n = set.n_robots();
            (vec![set; runs], n)
        }
    };
    Ok((sets, per_robot(&c.delta_p0, n)?))
}

fn per_robot(values: &[f64], n: usize) -> Result<Vec<f64>> {
    match values {
        [v] => Ok(vec![*v; n]),
        v if v.len() == n => Ok(v.to_vec()),
        v => bail!("`delta_p0`: {} values for {n} robots", v.len()),
    }
}

fn cmd_spatial(c: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let (sets, delta_p0) = spatial_sets(c)?;
    let initial_modes = c
        .initial_modes
        .iter()
        .flatten()
        .map(|m| m.parse::<AgentMode>())
        .collect::<swarm_sacrifice::Result<Vec<_>>>()
        .context("`initial_modes`")?;
    let mut mode_switch = sim_mode_switch(c)?;
    match &mut mode_switch {
        ModeSwitch::Fixed { n_pl } => *n_pl = initial_modes.iter().filter(|m| **m == AgentMode::Pl).count(),
        ModeSwitch::Collaborative(SwitchRule::Adaptive { .. }) => {
            bail!("`switch_rule` = adaptive needs a global interaction rate; use local or constant")
        }
        _ => {}
    }
    let base = SpatialConfig {
        geometry: CylinderGeometry::new(c.radius.expect("resolved"), c.height.expect("resolved"))?,
        los: LosParams {
            theta_max: c.theta_max.expect("resolved"),
            d_max: c.d_max.expect("resolved"),
            eps_occ: c.eps_occ.expect("resolved"),
        },
        tau_p: c.tau_p.expect("resolved"),
        tau_window: c.tau_window,
        tau_refresh: c.tau_refresh,
        gamma_thresh: c.gamma_thresh,
        delta_p0,
        sigma: c.sigma.expect("resolved"),
        mode_switch,
        collaboration: Collaboration::Smart,
        r_ms_max: c.r_ms_max,
        comm_cut: c.comm_cut,
        initial_modes,
        seed: c.seed,
    };
    let mut jobs = Vec::new();
    for collaboration in collaborations(c.collaboration.expect("resolved")) {
        for (run, set) in sets.iter().enumerate() {
            let cfg = SpatialConfig {
                collaboration,
                seed: c.seed + run as u64,
                ..base.clone()
            };
            jobs.push((run, set, cfg));
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(_, set, cfg)| run_spatial(set, cfg))
        .collect::<swarm_sacrifice::Result<_>>()?;

    let head = header(c)?;
    let mut files = Vec::new();
    let mut rows = Vec::new();
    for ((run, _, cfg), result) in jobs.iter().zip(&results) {
        let tag = format!("{}_run{run}", cfg.collaboration);
        let mut comments = head.clone();
        comments.push(format!(
            "run {run}: collaboration={} seed={}",
            cfg.collaboration, cfg.seed
        ));
        files.push(write_atomic(
            &out.join(format!("modes_{tag}.csv")),
            &comments,
            &result.mode_rows(),
        )?);
        files.push(write_atomic(
            &out.join(format!("network_{tag}.csv")),
            &comments,
            &result.network.rows(),
        )?);
        for (&robot_id, &productivity) in result.ids.iter().zip(&result.run.per_agent_productivity) {
            rows.push(RobotRow {
                collaboration: cfg.collaboration,
                run: *run,
                seed: cfg.seed,
                robot_id,
                productivity,
            });
        }
    }
    files.insert(0, write_atomic(&out.join(SPATIAL_FILE), &head, &rows)?);
    Ok(Outcome {
        files,
        summary: summarize(rows.iter().map(|r| (r.collaboration.to_string(), r.productivity))),
    })
}
