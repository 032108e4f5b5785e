use crate::error::{Error, Result};
use crate::meanfield::{MeanFieldSystem, OccupancyVector};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct IntegrationOptions<T> {
    pub dt: T,
    pub t_end: T,
    /// Keep every `record_stride`-th state. The initial and final states are always kept.
    pub record_stride: usize,
    /// Stop early once `‖rhs‖∞` drops below this value.
    pub steady_tolerance: Option<T>,
}

impl<T: Scalar> IntegrationOptions<T> {
    pub fn new(dt: T, t_end: T) -> Self {
        Self {
            dt,
            t_end,
            record_stride: usize::MAX,
            steady_tolerance: None,
        }
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride.max(1);
        self
    }

    pub fn with_steady_tolerance(mut self, tol: T) -> Self {
        self.steady_tolerance = Some(tol);
        self
    }

    fn steps(&self) -> usize {
        let ratio = (self.t_end / self.dt).to_f64_lossy();
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

impl<T: Scalar> Default for IntegrationOptions<T> {
    fn default() -> Self {
        Self::new(T::lit(0.01), T::lit(1e4)).with_steady_tolerance(T::lit(1e-10))
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<OccupancyVector<T>>,
    /// Time at which the steady-state tolerance was met, if it was.
    pub steady_at: Option<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn final_state(&self) -> OccupancyVector<T> {
        *self.states.last().expect("trajectory holds the initial state")
    }
}

/// Fixed-step classical Runge–Kutta integration.
pub fn integrate<T: Scalar, S: MeanFieldSystem<T> + ?Sized>(
    system: &S,
    initial: OccupancyVector<T>,
    opts: &IntegrationOptions<T>,
) -> Result<Trajectory<T>> {
    if !(opts.dt > T::zero()) {
        return Err(Error::param("dt", "must be > 0"));
    }
    if !(opts.t_end >= opts.dt) {
        return Err(Error::param("t_end", "must be >= dt"));
    }
    if !initial.is_finite() {
        return Err(Error::NonFinite { step: 0 });
    }
    let dt = opts.dt;
    let half = dt / T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let n_steps = opts.steps();

    let mut times = vec![T::zero()];
    let mut states = vec![initial];
    let mut steady_at = None;
    let mut x = initial;
    let mut last_recorded = 0;

    for step in 0..n_steps {
        let k1 = system.rhs(&x)?;
        if let Some(tol) = opts.steady_tolerance {
            if k1.max_abs() < tol {
                steady_at = Some(T::from_count(step) * dt);
                break;
            }
        }
        let k2 = system.rhs(&(x + k1 * half))?;
        let k3 = system.rhs(&(x + k2 * half))?;
        let k4 = system.rhs(&(x + k3 * dt))?;
        x = x + (k1 + k2 * T::lit(2.0) + k3 * T::lit(2.0) + k4) * sixth;
        if !x.is_finite() {
            return Err(Error::NonFinite { step: step + 1 });
        }
        if (step + 1) % opts.record_stride.max(1) == 0 {
            times.push(T::from_count(step + 1) * dt);
            states.push(x);
            last_recorded = step + 1;
        }
        if step + 1 == n_steps && last_recorded != n_steps {
            times.push(T::from_count(n_steps) * dt);
            states.push(x);
        }
    }
    if let Some(t) = steady_at {
        if times.last() != Some(&t) {
            times.push(t);
            states.push(x);
        }
    }
    Ok(Trajectory {
        times,
        states,
        steady_at,
    })
}
