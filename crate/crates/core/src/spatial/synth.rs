use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::agent::steps_for;
use crate::deadreckoning::DriftProcess;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::spatial::geometry::{CylinderGeometry, SurfacePoint};
use crate::spatial::trajectory::{TrajectoryFrame, TrajectorySet};

/// Constant-speed walk whose heading diffuses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkParams {
    /// m/s
    pub speed: f64,
    /// rad/√s
    pub heading_diffusion: f64,
    pub dt: f64,
}

impl Default for WalkParams {
    fn default() -> Self {
        Self {
            speed: 0.05,
            heading_diffusion: 1.0,
            dt: 0.05,
        }
    }
}

/// Random walk on the lateral surface, reflected at the rims.
pub fn synth_random_walk(
    geometry: &CylinderGeometry,
    duration: f64,
    walk: &WalkParams,
    robot_id: u32,
    seed: u64,
) -> Result<Vec<TrajectoryFrame>> {
    geometry.validate()?;
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::param("duration", "must be finite and >= 0"));
    }
    if !(walk.dt > 0.0) || !(walk.speed >= 0.0) || !(walk.heading_diffusion >= 0.0) {
        return Err(Error::param("walk", "dt must be > 0, speed and heading diffusion >= 0"));
    }
    let mut rng = stream_rng(seed, Stream::Scenario(robot_id));
    let (r, h) = (geometry.radius, geometry.height);
    let mut phi = rng.random::<f64>() * TAU;
    let mut z = rng.random::<f64>() * h;
    let mut heading = rng.random::<f64>() * TAU;
    let n = steps_for(duration, walk.dt) as usize;
    let mut frames = Vec::with_capacity(n + 1);
    let step_len = walk.speed * walk.dt;
    let turn = walk.heading_diffusion * walk.dt.sqrt();
    for k in 0..=n {
        frames.push(TrajectoryFrame {
            t: k as f64 * walk.dt,
            robot_id,
            pose: SurfacePoint::new(phi, z),
            estimate: None,
        });
        let g: f64 = rng.sample(StandardNormal);
        heading += turn * g;
        phi += step_len * heading.cos() / r;
        z += step_len * heading.sin();
        if z < 0.0 {
            z = -z;
            heading = -heading;
        } else if z > h {
            z = 2.0 * h - z;
            heading = -heading;
        }
        z = z.clamp(0.0, h);
    }
    Ok(frames)
}

/// Adds estimated poses: truth plus a per-robot Wiener drift in tangent coordinates.
/// A reset `(robot_id, t)` zeroes the drift at the first frame at or after `t`.
pub fn apply_drift(
    frames: &[TrajectoryFrame],
    geometry: &CylinderGeometry,
    sigma: f64,
    seed: u64,
    resets: &[(u32, f64)],
) -> Result<Vec<TrajectoryFrame>> {
    if !(sigma >= 0.0) {
        return Err(Error::param("sigma", "must be >= 0"));
    }
    let mut state: BTreeMap<u32, (DriftProcess, f64)> = BTreeMap::new();
    let mut out = Vec::with_capacity(frames.len());
    for f in frames {
        let (drift, last_t) = state.entry(f.robot_id).or_insert_with(|| {
            (
                DriftProcess::new(sigma, stream_rng(seed, Stream::Drift(f.robot_id))),
                f.t,
            )
        });
        if f.t > *last_t {
            drift.advance(f.t - *last_t);
        }
        if resets
            .iter()
            .any(|&(id, t)| id == f.robot_id && t > *last_t && t <= f.t)
        {
            drift.reset();
        }
        *last_t = f.t;
        let [arc, dz] = drift.error();
        out.push(TrajectoryFrame {
            estimate: Some(SurfacePoint::new(f.pose.phi + arc / geometry.radius, f.pose.z + dz)),
            ..*f
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormationParams {
    pub geometry: CylinderGeometry,
    pub walk: WalkParams,
    pub duration: f64,
    /// Height offsets of the robots from the shared base path.
    pub offsets: Vec<f64>,
    pub delta_p0: Vec<f64>,
    pub seed: u64,
}

impl Default for FormationParams {
    fn default() -> Self {
        Self {
            geometry: CylinderGeometry::default(),
            walk: WalkParams::default(),
            duration: 200.0,
            offsets: vec![0.0, 0.005, 0.010],
            delta_p0: vec![1.0, 1.3, 1.5],
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormationScenario {
    pub set: TrajectorySet,
    pub delta_p0: Vec<f64>,
    /// Index of the middle robot, which sees both others.
    pub hub: usize,
}

/// One base path replicated at fixed height offsets.
pub fn scenario_formation(params: &FormationParams) -> Result<FormationScenario> {
    let n = params.offsets.len();
    if n == 0 || params.delta_p0.len() != n {
        return Err(Error::param(
            "delta_p0",
            "needs one value per offset, at least one robot",
        ));
    }
    let (lo, hi) = params
        .offsets
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &o| {
            (lo.min(o), hi.max(o))
        });
    let spread = hi - lo;
    if !(spread < params.geometry.height) {
        return Err(Error::param(
            "offsets",
            "spread must be smaller than the cylinder height",
        ));
    }
    let base_geometry = CylinderGeometry {
        height: params.geometry.height - spread,
        ..params.geometry
    };
    let base = synth_random_walk(&base_geometry, params.duration, &params.walk, 0, params.seed)?;
    let mut frames = Vec::with_capacity(base.len() * n);
    for (i, &off) in params.offsets.iter().enumerate() {
        frames.extend(base.iter().map(|f| TrajectoryFrame {
            robot_id: i as u32,
            pose: SurfacePoint::new(f.pose.phi, f.pose.z + off - lo),
            ..*f
        }));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| params.offsets[a].total_cmp(&params.offsets[b]));
    Ok(FormationScenario {
        set: TrajectorySet::from_frames(&frames, params.walk.dt, &params.geometry)?,
        delta_p0: params.delta_p0.clone(),
        hub: order[n / 2],
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageParams {
    pub geometry: CylinderGeometry,
    pub walk: WalkParams,
    pub duration: f64,
    pub n_robots: usize,
    pub n_runs: usize,
    pub base_seed: u64,
}

impl Default for CoverageParams {
    fn default() -> Self {
        Self {
            geometry: CylinderGeometry::default(),
            walk: WalkParams::default(),
            duration: 200.0,
            n_robots: 10,
            n_runs: 30,
            base_seed: 0,
        }
    }
}

const TRANSFORM_STREAM_BASE: u32 = 1 << 20;

/// Base walks, then one independent rotation and height shift per trajectory per run.
pub fn scenario_coverage(params: &CoverageParams) -> Result<Vec<TrajectorySet>> {
    let g = &params.geometry;
    let base: Vec<Vec<TrajectoryFrame>> = (0..params.n_robots as u32)
        .map(|id| synth_random_walk(g, params.duration, &params.walk, id, params.base_seed))
        .collect::<Result<_>>()?;
    (0..params.n_runs)
        .map(|run| {
            let mut rng = stream_rng(params.base_seed, Stream::Scenario(TRANSFORM_STREAM_BASE + run as u32));
            let mut frames = Vec::new();
            for path in &base {
                let rot = rng.random::<f64>() * TAU;
                let shift = (rng.random::<f64>() - 0.5) * g.height;
                frames.extend(path.iter().map(|f| TrajectoryFrame {
                    pose: SurfacePoint::new(f.pose.phi + rot, (f.pose.z + shift).clamp(0.0, g.height)),
                    ..*f
                }));
            }
            TrajectorySet::from_frames(&frames, params.walk.dt, g)
        })
        .collect()
}
