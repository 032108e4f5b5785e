//! Self-organized strategic sacrifice for collective localization.
//!
//! Agents either dead-reckon (productive while not lost) or act as perfect localizers
//! that correct the dead reckoners they meet. Three layers model the swarm:
//!
//! - [`meanfield`]: occupancy ODEs, closed-form steady states and their stability.
//! - [`wellmixed`]: agent-based runs where uniformly random pairs meet.
//! - [`spatial`]: robots on a cylinder that meet by line of sight.
//!
//! The analytic layers are generic over [`Scalar`]; the simulators use `f64`.

// `!(x > 0.0)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod csvio;
pub mod deadreckoning;
pub mod error;
pub mod meanfield;
pub mod mode;
pub mod params;
pub mod rng;
pub mod scalar;
pub mod spatial;
pub mod wellmixed;

pub use error::{Error, Result};
pub use mode::{AgentMode, DisorientationParams};
pub use params::{ModeSwitch, SwarmParams, SwitchRule};
pub use scalar::Scalar;

pub type SwarmParams64 = params::SwarmParams<f64>;
pub type SwarmParams32 = params::SwarmParams<f32>;
pub type OccupancyVector64 = meanfield::OccupancyVector<f64>;
pub type OccupancyVector32 = meanfield::OccupancyVector<f32>;
pub type DisorientationParams64 = mode::DisorientationParams<f64>;
pub type SteadyStateReport64 = meanfield::SteadyStateReport<f64>;
