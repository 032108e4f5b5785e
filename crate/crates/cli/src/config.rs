//! Experiment configuration: one JSON document, defaults filled per layer.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Meanfield,
    Wellmixed,
    Spatial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeKind {
    Fixed,
    Individual,
    Collaborative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Deterministic,
    Exponential,
    Drift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollaborationSpec {
    Basic,
    Smart,
    /// Basic and smart with matched seeds.
    Both,
}

/// `constant` uses `r_ms`, `adaptive` uses `α/r_int`, `local` uses `α/r̂_int`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchRuleKind {
    Constant,
    Adaptive,
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Formation,
    Coverage,
    File,
}

/// A parameter axis: explicit values, one value, or `{log|linear: [start, stop, num]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Single(f64),
    Values(Vec<f64>),
    Log { log: [f64; 3] },
    Linear { linear: [f64; 3] },
}

impl Grid {
    pub fn expand(&self, field: &str) -> Result<Vec<f64>> {
        let spaced = |[a, b, n]: [f64; 3], log: bool| -> Result<Vec<f64>> {
            if !(n >= 1.0 && n.fract() == 0.0) {
                bail!("`{field}`: point count must be a positive integer, got {n}");
            }
            if log && !(a > 0.0 && b > 0.0) {
                bail!("`{field}`: log grid bounds must be > 0");
            }
            let n = n as usize;
            Ok((0..n)
                .map(|i| {
                    let w = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                    if log {
                        10f64.powf(a.log10() + w * (b.log10() - a.log10()))
                    } else {
                        a + w * (b - a)
                    }
                })
                .collect())
        };
        let values = match self {
            Grid::Single(v) => vec![*v],
            Grid::Values(v) => v.clone(),
            Grid::Log { log } => spaced(*log, true)?,
            Grid::Linear { linear } => spaced(*linear, false)?,
        };
        if values.is_empty() {
            bail!("`{field}`: grid is empty");
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            bail!("`{field}`: non-finite grid value {bad}");
        }
        Ok(values)
    }
}

fn d_seed() -> u64 {
    0
}
fn d_r_lost() -> f64 {
    0.04
}
fn d_gamma_thresh() -> f64 {
    0.4
}
fn d_delta_p0() -> Vec<f64> {
    vec![1.0]
}
fn d_tau_lost() -> f64 {
    3.46
}
fn d_tau_refresh() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub layer: Option<Layer>,
    /// Empty for the mean field means every regime.
    #[serde(default)]
    pub regime: Option<RegimeKind>,
    #[serde(default = "d_seed")]
    pub seed: u64,
    /// Replicates per cell (well-mixed) or scenario runs (coverage). Seeds are `seed + i`.
    #[serde(default)]
    pub runs: Option<usize>,
    /// Defaults to 30, or 10 robots in the coverage scenario.
    #[serde(default)]
    pub n_agents: Option<usize>,
    #[serde(default = "d_r_lost")]
    pub r_lost: f64,
    #[serde(default)]
    pub tau_p: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default = "d_gamma_thresh")]
    pub gamma_thresh: f64,
    /// One value for every agent, or one per robot.
    #[serde(default = "d_delta_p0")]
    pub delta_p0: Vec<f64>,
    #[serde(default)]
    pub r_int: Option<Grid>,
    #[serde(default)]
    pub n_pl: Option<Grid>,
    #[serde(default)]
    pub initial_fraction: Option<Grid>,
    #[serde(default)]
    pub r_ms: Option<Grid>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Collaborative rate rule in the simulators.
    #[serde(default)]
    pub switch_rule: Option<SwitchRuleKind>,
    #[serde(default)]
    pub loss: Option<LossKind>,
    #[serde(default = "d_tau_lost")]
    pub tau_lost: f64,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub collaboration: Option<CollaborationSpec>,
    #[serde(default)]
    pub tau_window: Option<f64>,
    #[serde(default)]
    pub r_ms_max: Option<f64>,
    #[serde(default)]
    pub record_occupancy: bool,
    #[serde(default)]
    pub scenario: Option<ScenarioKind>,
    #[serde(default)]
    pub trajectory_file: Option<PathBuf>,
    #[serde(default)]
    pub comm_cut: Option<f64>,
    #[serde(default = "d_tau_refresh")]
    pub tau_refresh: f64,
    #[serde(default)]
    pub initial_modes: Option<Vec<String>>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub height: Option<f64>,
    #[serde(default)]
    pub theta_max: Option<f64>,
    #[serde(default)]
    pub d_max: Option<f64>,
    #[serde(default)]
    pub eps_occ: Option<f64>,
    #[serde(default)]
    pub speed: Option<f64>,
    #[serde(default)]
    pub heading_diffusion: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

/// Reads a config file and applies `KEY=VALUE` overrides to its top-level fields.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read config {}", p.display()))?;
            serde_json::from_str::<Value>(&text).with_context(|| format!("config {} is not valid JSON", p.display()))?
        }
        None => Value::Object(Map::new()),
    };
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| anyhow!("config must be a JSON object"))?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{item}` is not KEY=VALUE"))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        obj.insert(key.trim().to_string(), value);
    }
    let cfg: ExperimentConfig = serde_json::from_value(doc).context("invalid config")?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let n_agents = self.n_agents.unwrap_or(30);
        if n_agents < 1 {
            bail!("`n_agents` must be >= 1");
        }
        if self.runs == Some(0) {
            bail!("`runs` must be >= 1");
        }
        if self.delta_p0.is_empty() {
            bail!("`delta_p0` needs at least one value");
        }
        if let Some(grid) = &self.n_pl {
            for v in grid.expand("n_pl")? {
                if v < 0.0 || v.fract() != 0.0 {
                    bail!("`n_pl`: {v} is not a non-negative integer");
                }
                if v > n_agents as f64 {
                    bail!("`n_pl`: N_PL = {v} exceeds N = {n_agents}");
                }
            }
        }
        if let Some(grid) = &self.initial_fraction {
            if let Some(bad) = grid
                .expand("initial_fraction")?
                .into_iter()
                .find(|f| !(0.0..=1.0).contains(f))
            {
                bail!("`initial_fraction`: {bad} is outside [0, 1]");
            }
        }
        for (name, grid) in [("r_int", &self.r_int), ("r_ms", &self.r_ms)] {
            if let Some(g) = grid {
                if let Some(bad) = g.expand(name)?.into_iter().find(|v| *v < 0.0) {
                    bail!("`{name}`: {bad} is negative");
                }
            }
        }
        Ok(())
    }

    /// Fills layer-dependent defaults. The result is what output headers record.
    pub fn resolved(&self, layer: Layer) -> Result<ExperimentConfig> {
        if let Some(l) = self.layer {
            if l != layer {
                bail!("config is for layer `{l:?}` but `{layer:?}` was requested");
            }
        }
        let mut c = self.clone();
        c.layer = Some(layer);
        let pick = |v: Option<f64>, mf: f64, wm: f64, sp: f64| {
            v.or(Some(match layer {
                Layer::Meanfield => mf,
                Layer::Wellmixed => wm,
                Layer::Spatial => sp,
            }))
        };
        c.tau_p = pick(c.tau_p, 100.0, 10.0, 20.0);
        c.dt = pick(c.dt, 0.01, 0.01, 0.05);
        c.horizon = pick(c.horizon, 1e4, 200.0, 200.0);
        c.alpha = pick(c.alpha, 0.01, 1.0, swarm_sacrifice::spatial::SPATIAL_ALPHA);
        match layer {
            Layer::Meanfield => {
                let n = *c.n_agents.get_or_insert(30);
                c.runs.get_or_insert(1);
                c.r_int.get_or_insert(Grid::Log {
                    log: [0.01, 100.0, 41.0],
                });
                if c.n_pl.is_none() {
                    c.n_pl = Some(Grid::Values((1..n).map(|v| v as f64).collect()));
                }
            }
            Layer::Wellmixed => {
                c.regime.get_or_insert(RegimeKind::Fixed);
                c.r_int.get_or_insert(Grid::Log { log: [0.1, 100.0, 5.0] });
                c.initial_fraction.get_or_insert(Grid::Linear {
                    linear: [0.1, 0.9, 5.0],
                });
                c.loss.get_or_insert(LossKind::Deterministic);
                c.collaboration.get_or_insert(CollaborationSpec::Basic);
                c.runs.get_or_insert(1);
                c.n_agents.get_or_insert(30);
                c.switch_rule.get_or_insert(SwitchRuleKind::Local);
                if c.loss == Some(LossKind::Drift) {
                    c.sigma.get_or_insert(0.05);
                }
            }
            Layer::Spatial => {
                c.regime.get_or_insert(RegimeKind::Collaborative);
                let scenario = *c.scenario.get_or_insert(if c.trajectory_file.is_some() {
                    ScenarioKind::File
                } else {
                    ScenarioKind::Formation
                });
                c.collaboration.get_or_insert(CollaborationSpec::Smart);
                c.switch_rule.get_or_insert(SwitchRuleKind::Local);
                // The formation default drifts fast enough that lone robots lose
                // localization within seconds.
                c.sigma
                    .get_or_insert(if scenario == ScenarioKind::Formation { 0.2 } else { 0.05 });
                if scenario == ScenarioKind::Formation && self.delta_p0 == d_delta_p0() {
                    c.delta_p0 = vec![1.0, 1.3, 1.5];
                }
                if scenario == ScenarioKind::Formation
                    && c.initial_modes.is_none()
                    && c.regime != Some(RegimeKind::Individual)
                {
                    c.initial_modes = Some(vec!["DR_NOTLOST".into(), "PL".into(), "DR_NOTLOST".into()]);
                }
                c.runs
                    .get_or_insert(if scenario == ScenarioKind::Coverage { 30 } else { 1 });
                if scenario == ScenarioKind::Coverage {
                    c.n_agents.get_or_insert(10);
                }
                if scenario == ScenarioKind::File && c.trajectory_file.is_none() {
                    bail!("`scenario` = file needs `trajectory_file`");
                }
                c.radius.get_or_insert(0.3);
                c.height.get_or_insert(1.0);
                c.theta_max.get_or_insert(std::f64::consts::FRAC_PI_2);
                c.d_max.get_or_insert(0.5);
                c.eps_occ.get_or_insert(0.02);
                c.speed.get_or_insert(0.05);
                c.heading_diffusion.get_or_insert(1.0);
            }
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_expand() {
        assert_eq!(Grid::Single(2.0).expand("x").unwrap(), vec![2.0]);
        let log = Grid::Log { log: [0.1, 100.0, 4.0] }.expand("x").unwrap();
        for (got, want) in log.iter().zip([0.1, 1.0, 10.0, 100.0]) {
            assert!((got / want - 1.0).abs() < 1e-12);
        }
        assert_eq!(
            Grid::Linear {
                linear: [0.0, 1.0, 3.0]
            }
            .expand("x")
            .unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        assert!(Grid::Values(vec![]).expand("x").is_err());
        assert!(Grid::Log { log: [0.0, 1.0, 3.0] }.expand("x").is_err());
    }

    #[test]
    fn grid_json_forms() {
        let g: Grid = serde_json::from_str(r#"{"log": [0.1, 10, 3]}"#).unwrap();
        assert_eq!(g, Grid::Log { log: [0.1, 10.0, 3.0] });
        let g: Grid = serde_json::from_str("[1, 2]").unwrap();
        assert_eq!(g, Grid::Values(vec![1.0, 2.0]));
        let g: Grid = serde_json::from_str("3").unwrap();
        assert_eq!(g, Grid::Single(3.0));
    }

    #[test]
    fn defaults_and_overrides() {
        let c = load_config(None, &["n_agents=12".into(), "scenario=coverage".into()]).unwrap();
        assert_eq!(c.n_agents, Some(12));
        assert_eq!(c.scenario, Some(ScenarioKind::Coverage));
        let r = c.resolved(Layer::Wellmixed).unwrap();
        assert_eq!(r.dt, Some(0.01));
        assert_eq!(r.gamma_thresh, 0.4);
        assert_eq!(r.tau_p, Some(10.0));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_cells() {
        let err = load_config(None, &["n_agnets=3".into()]).unwrap_err();
        assert!(format!("{err:#}").contains("n_agnets"));
        let err = load_config(None, &["n_pl=[31]".into()]).unwrap_err();
        assert!(format!("{err:#}").contains("exceeds N"));
        assert!(load_config(None, &["novalue".into()]).is_err());
    }

    #[test]
    fn layer_mismatch_is_an_error() {
        let c = load_config(None, &["layer=spatial".into()]).unwrap();
        assert!(c.resolved(Layer::Meanfield).is_err());
    }
}
