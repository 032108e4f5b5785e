//! Synthetic dead-reckoning drift.
//!
//! The estimate error is a planar Wiener process in surface-tangent coordinates
//! (arc length, height), with per-axis increments `σ·√dt·N(0,1)`. A correction moves the
//! reference to the current accumulated drift, so the error is exactly zero right after.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Debug)]
pub struct DriftProcess {
    rng: ChaCha8Rng,
    sigma: f64,
    accumulated: [f64; 2],
    reference: [f64; 2],
}

impl DriftProcess {
    pub fn new(sigma: f64, rng: ChaCha8Rng) -> Self {
        Self {
            rng,
            sigma,
            accumulated: [0.0; 2],
            reference: [0.0; 2],
        }
    }

    /// Adds one increment over `dt`. Draws two normals whatever `σ` is.
    pub fn advance(&mut self, dt: f64) {
        let scale = self.sigma * dt.sqrt();
        for axis in &mut self.accumulated {
            let z: f64 = self.rng.sample(StandardNormal);
            *axis += scale * z;
        }
    }

    pub fn reset(&mut self) {
        self.reference = self.accumulated;
    }

    /// Current error vector `(arc, z)` since the last reset.
    pub fn error(&self) -> [f64; 2] {
        [
            self.accumulated[0] - self.reference[0],
            self.accumulated[1] - self.reference[1],
        ]
    }

    pub fn magnitude(&self) -> f64 {
        let [a, b] = self.error();
        a.hypot(b)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}
