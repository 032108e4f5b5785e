//! Robots on a cylinder surface meeting by line of sight.
//!
//! Trajectories come from files or synthetic random walks and are resampled onto one
//! time grid. Dead-reckoning error is either recorded with the trajectory or produced by
//! a synthetic Wiener drift. Each robot runs the same state machine as in the
//! well-mixed simulator, with interaction rates estimated from effective meetings only.

mod geometry;
mod network;
mod sim;
mod synth;
mod trajectory;

pub use crate::agent::InteractionEvent;
pub use geometry::{angle_diff, line_of_sight, wrap_angle, CylinderGeometry, LosParams, SurfacePoint};
pub use network::{network_stats, InteractionNetwork, NetworkEdgeRow, NetworkStats};
pub use sim::{run_spatial, ModeRow, SpatialConfig, SpatialResult, SPATIAL_ALPHA};
pub use synth::{
    apply_drift, scenario_coverage, scenario_formation, synth_random_walk, CoverageParams, FormationParams,
    FormationScenario, WalkParams,
};
pub use trajectory::{read_trajectories, write_trajectories, TrajectoryFrame, TrajectorySet};
