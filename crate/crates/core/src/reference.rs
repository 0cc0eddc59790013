//! Reference solutions: direct simulation of the fast system, the averaged
//! equation, and the first-order expansion of micro solutions.

use crate::chain::{exchange_field, ChainConfig, ChainTrajectory};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::integrator::{integrate, integrate_strided, MidpointConfig, Trajectory};
use crate::quadrature::commensurate_steps;
use crate::vec3::{cross, ll_rhs, Spin, Vec3};

/// Direct simulations must resolve the fast period with at least this many
/// steps.
pub const DNS_STEPS_PER_PERIOD: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct DnsConfig {
    pub eps: f64,
    pub beta: f64,
    pub gamma: f64,
    pub t_end: f64,
    pub dt: f64,
    pub field: FieldSpec,
    pub m0: Vec3,
    pub midpoint: MidpointConfig,
}

impl DnsConfig {
    /// Uses `beta = gamma = 1` and `dt = eps / 20`.
    pub fn new(eps: f64, t_end: f64, field: FieldSpec, m0: Vec3) -> Self {
        DnsConfig {
            eps,
            beta: 1.0,
            gamma: 1.0,
            t_end,
            dt: eps / DNS_STEPS_PER_PERIOD,
            field,
            m0,
            midpoint: MidpointConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::Parameter(format!("eps = {} must be positive", self.eps)));
        }
        check_dns_step(self.dt, self.eps)?;
        if commensurate_steps(self.t_end, self.dt).is_none() {
            return Err(Error::Parameter(format!(
                "dt = {} must divide T = {}",
                self.dt, self.t_end
            )));
        }
        Spin::new(self.m0)?;
        self.midpoint.validate()
    }

    /// Number of time steps, one right-hand side per step.
    pub fn steps(&self) -> usize {
        commensurate_steps(self.t_end, self.dt).unwrap_or(0)
    }
}

fn check_dns_step(dt: f64, eps: f64) -> Result<()> {
    if !(dt > 0.0) || dt > eps / DNS_STEPS_PER_PERIOD * (1.0 + 1e-12) {
        return Err(Error::Parameter(format!("DNS step dt = {dt} must satisfy 0 < dt <= eps/20")));
    }
    Ok(())
}

/// Largest step `<= eps / 20` that divides `span`.
pub fn dns_step_for(span: f64, eps: f64) -> f64 {
    let n = (span / (eps / DNS_STEPS_PER_PERIOD) * (1.0 - 1e-12)).ceil().max(1.0);
    span / n
}

/// Full damped equation with the two-scale field.
pub fn dns_single(cfg: &DnsConfig) -> Result<Trajectory<Vec3>> {
    dns_single_strided(cfg, 1)
}

/// As [`dns_single`], recording every `stride`-th step.
pub fn dns_single_strided(cfg: &DnsConfig, stride: usize) -> Result<Trajectory<Vec3>> {
    cfg.validate()?;
    let (eps, beta, gamma) = (cfg.eps, cfg.beta, cfg.gamma);
    let field = &cfg.field;
    let rhs = |t: f64, m: &Vec3| ll_rhs(*m, field.at(t, eps), beta, gamma);
    integrate_strided(&rhs, 0.0, cfg.m0, cfg.t_end, cfg.dt, &cfg.midpoint, stride)
}

/// Full coupled chain with damping, solved with a global fixed point.
/// Integrates from 0 to `t_end` with step `dt`, recording every
/// `stride`-th step.
pub fn dns_chain(cfg: &ChainConfig, dt: f64, t_end: f64, stride: usize) -> Result<ChainTrajectory> {
    cfg.validate()?;
    check_dns_step(dt, cfg.eps)?;
    let rhs = |t: f64, m: &Vec<Vec3>| -> Vec<Vec3> {
        (0..m.len())
            .map(|i| ll_rhs(m[i], exchange_field(m, i, t, cfg), cfg.beta, cfg.gamma))
            .collect()
    };
    integrate_strided(&rhs, 0.0, cfg.initial_spins(), t_end, dt, &cfg.midpoint, stride)
}

/// The averaged equation `m' = -beta m x Hbar - gamma m x (m x Hbar)` with
/// `Hbar(t)` the period mean of the field.
pub fn effective_solve(
    field: &FieldSpec,
    beta: f64,
    gamma: f64,
    m0: Vec3,
    t_end: f64,
    dt: f64,
    midpoint: &MidpointConfig,
) -> Result<Trajectory<Vec3>> {
    let rhs = |t: f64, m: &Vec3| ll_rhs(*m, field.effective(t), beta, gamma);
    integrate(&rhs, 0.0, m0, t_end, dt, midpoint)
}

/// Micro problem on the fast time scale,
/// `m'(t) = -eps beta m x H(eps t + t_a, t + r_frac)`, over `t in [0, 1]`.
pub fn scaled_micro(
    t_a: f64,
    r_frac: f64,
    m: Vec3,
    eps: f64,
    beta: f64,
    field: &FieldSpec,
    dt: f64,
    midpoint: &MidpointConfig,
) -> Result<Trajectory<Vec3>> {
    let rhs = |t: f64, m: &Vec3| -cross(*m, field.eval(eps * t + t_a, t + r_frac)) * (eps * beta);
    integrate(&rhs, 0.0, m, 1.0, dt, midpoint)
}

/// Trapezoid nodes per unit time for [`m1_oracle`].
const M1_NODES_PER_UNIT: f64 = 1e5;

/// First-order term `m1(t) = -beta int_0^t M x H(t_a, s + r_frac) ds` of the
/// expansion `m = M + eps m1 + O(eps^2)`.
pub fn m1_oracle(t: f64, t_a: f64, r_frac: f64, m: Vec3, beta: f64, field: &FieldSpec) -> Vec3 {
    let n = ((t.abs() * M1_NODES_PER_UNIT).ceil() as usize).max(1);
    let h = t / n as f64;
    let g = |s: f64| cross(m, field.eval(t_a, s + r_frac));
    let mut acc = (g(0.0) + g(t)) * 0.5;
    for k in 1..n {
        acc += g(k as f64 * h);
    }
    -(acc * (h * beta))
}

/// [`m1_oracle`] at `t_k = k / samples`, `k = 0..=samples`, by one cumulative
/// trapezoid sweep.
pub fn m1_series(samples: usize, t_a: f64, r_frac: f64, m: Vec3, beta: f64, field: &FieldSpec) -> Vec<Vec3> {
    let sub = ((M1_NODES_PER_UNIT / samples as f64).ceil() as usize).max(1);
    let h = 1.0 / (samples * sub) as f64;
    let g = |s: f64| cross(m, field.eval(t_a, s + r_frac));
    let mut out = Vec::with_capacity(samples + 1);
    out.push(Vec3::ZERO);
    let mut acc = Vec3::ZERO;
    let mut prev = g(0.0);
    for k in 1..=samples * sub {
        let cur = g(k as f64 * h);
        acc += (prev + cur) * (0.5 * h);
        prev = cur;
        if k % sub == 0 {
            out.push(-(acc * beta));
        }
    }
    out
}
