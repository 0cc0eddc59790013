//! Implicit midpoint rule with a fixed-point inner solve.
//!
//! For right-hand sides of Landau-Lifschitz form the increment
//! `m' - m` is orthogonal to the midpoint `(m + m') / 2`, so the rule
//! conserves `|m|` up to the inner-solve tolerance. The same stepper drives
//! single spins ([`Vec3`]) and whole chains (`Vec<Vec3>`).

use crate::error::{Error, Result};
use crate::quadrature::commensurate_steps;
use crate::vec3::Vec3;

/// States the midpoint rule can advance.
pub trait State: Clone {
    /// `self + h * rate`.
    fn add_scaled(&self, h: f64, rate: &Self) -> Self;
    /// `(self + other) / 2`.
    fn midpoint(&self, other: &Self) -> Self;
    /// Largest componentwise absolute difference.
    fn max_diff(&self, other: &Self) -> f64;
}

impl State for Vec3 {
    #[inline]
    fn add_scaled(&self, h: f64, rate: &Self) -> Self {
        *self + *rate * h
    }

    #[inline]
    fn midpoint(&self, other: &Self) -> Self {
        (*self + *other) * 0.5
    }

    #[inline]
    fn max_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }
}

impl State for Vec<Vec3> {
    fn add_scaled(&self, h: f64, rate: &Self) -> Self {
        self.iter().zip(rate).map(|(a, r)| *a + *r * h).collect()
    }

    fn midpoint(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| (*a + *b) * 0.5).collect()
    }

    fn max_diff(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| (*a - *b).max_abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointConfig {
    pub fp_tol: f64,
    pub fp_max_iter: usize,
}

impl Default for MidpointConfig {
    fn default() -> Self {
        MidpointConfig { fp_tol: 1e-12, fp_max_iter: 100 }
    }
}

impl MidpointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fp_tol > 0.0) {
            return Err(Error::Parameter(format!("fp_tol = {} must be positive", self.fp_tol)));
        }
        if self.fp_max_iter < 1 {
            return Err(Error::Parameter("fp_max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sampled solution. `times` is strictly increasing for forward runs and
/// strictly decreasing for backward runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &S)> {
        Some((*self.times.last()?, self.states.last()?))
    }
}

/// One midpoint step `m' = m + dt * rhs(t + dt/2, (m + m') / 2)`.
///
/// The fixed point is iterated from the explicit Euler predictor until
/// successive iterates differ by at most `cfg.fp_tol`. `dt` may be negative.
pub fn midpoint_step<S, F>(rhs: &F, t: f64, m: &S, dt: f64, cfg: &MidpointConfig) -> Result<S>
where
    S: State,
    F: Fn(f64, &S) -> S,
{
    let t_half = t + 0.5 * dt;
    let mut next = m.add_scaled(dt, &rhs(t_half, m));
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.fp_max_iter {
        let updated = m.add_scaled(dt, &rhs(t_half, &m.midpoint(&next)));
        residual = updated.max_diff(&next);
        next = updated;
        if residual <= cfg.fp_tol {
            return Ok(next);
        }
    }
    Err(Error::NonConverged { step: 0, residual })
}

/// Integrates from `t0` to `t1` with steps of magnitude `dt_abs`, in the
/// direction of `t1 - t0`. Every step is recorded.
pub fn integrate<S, F>(
    rhs: &F,
    t0: f64,
    m0: S,
    t1: f64,
    dt_abs: f64,
    cfg: &MidpointConfig,
) -> Result<Trajectory<S>>
where
    S: State,
    F: Fn(f64, &S) -> S,
{
    integrate_strided(rhs, t0, m0, t1, dt_abs, cfg, 1)
}

/// As [`integrate`], recording only every `stride`-th step plus the last.
pub fn integrate_strided<S, F>(
    rhs: &F,
    t0: f64,
    m0: S,
    t1: f64,
    dt_abs: f64,
    cfg: &MidpointConfig,
    stride: usize,
) -> Result<Trajectory<S>>
where
    S: State,
    F: Fn(f64, &S) -> S,
{
    cfg.validate()?;
    if !(dt_abs > 0.0) {
        return Err(Error::Parameter(format!("step {dt_abs} must be positive")));
    }
    if stride == 0 {
        return Err(Error::Parameter("stride must be at least 1".into()));
    }
    let span = t1 - t0;
    let n = commensurate_steps(span.abs(), dt_abs).ok_or_else(|| {
        Error::Parameter(format!("step {dt_abs} does not divide the interval [{t0}, {t1}]"))
    })?;
    let h = if n == 0 { 0.0 } else { span / n as f64 };

    let mut times = Vec::with_capacity(n / stride + 2);
    let mut states = Vec::with_capacity(n / stride + 2);
    times.push(t0);
    states.push(m0.clone());
    let mut m = m0;
    for k in 0..n {
        let t = t0 + k as f64 * h;
        m = midpoint_step(rhs, t, &m, h, cfg).map_err(|e| match e {
            Error::NonConverged { residual, .. } => Error::NonConverged { step: k, residual },
            other => other,
        })?;
        if (k + 1) % stride == 0 || k + 1 == n {
            times.push(if k + 1 == n { t1 } else { t0 + (k + 1) as f64 * h });
            states.push(m.clone());
        }
    }
    Ok(Trajectory { times, states })
}
