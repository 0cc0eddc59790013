//! Single-spin heterogeneous multiscale method.
//!
//! The macro solver advances `M` with the damped implicit midpoint scheme
//!
//! ```text
//! M_{n+1} = M_n + dt F + (gamma / beta) dt M_{n+1/2} x F,
//! ```
//!
//! where the flux `F = F(t_{n+1/2}, M_{n+1/2})` is not known in closed form.
//! It is estimated by solving the undamped micro problem
//! `m' = -beta m x H(s + t_a, (s + t_a) / eps)` forward and backward over
//! `s in [-tau/2, tau/2]` from `m(0) = M`, and averaging `m'` against the
//! kernel `K_tau`.

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::integrator::{integrate, MidpointConfig, Trajectory};
use crate::kernel::KernelSpec;
use crate::quadrature::commensurate_steps;
use crate::vec3::{cross, precession_rhs, Spin, Vec3};

/// Parameters of a single-spin HMM run.
#[derive(Debug, Clone)]
pub struct HmmConfig {
    pub eps: f64,
    pub tau: f64,
    pub macro_dt: f64,
    pub micro_dt: f64,
    pub beta: f64,
    pub gamma: f64,
    pub t_end: f64,
    pub kernel: KernelSpec,
    pub field: FieldSpec,
    pub m0: Vec3,
    pub midpoint: MidpointConfig,
    pub macro_fp_tol: f64,
    pub macro_fp_max_iter: usize,
    /// Start micro problems from `M / |M|` instead of `M`. Off by default;
    /// the chain method normalizes its interpolant, and this switch lets a
    /// decoupled chain be compared cell by cell with the single-spin method.
    pub normalize_micro_data: bool,
}

impl HmmConfig {
    /// Defaults: `beta = gamma = 1`, `micro_dt = eps / 100`, macro fixed-point
    /// tolerance `1e-10` with at most 50 iterations.
    pub fn new(
        eps: f64,
        tau: f64,
        macro_dt: f64,
        t_end: f64,
        kernel: KernelSpec,
        field: FieldSpec,
        m0: Vec3,
    ) -> Self {
        HmmConfig {
            eps,
            tau,
            macro_dt,
            micro_dt: eps / 100.0,
            beta: 1.0,
            gamma: 1.0,
            t_end,
            kernel,
            field,
            m0,
            midpoint: MidpointConfig::default(),
            macro_fp_tol: 1e-10,
            macro_fp_max_iter: 50,
            normalize_micro_data: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_scales(self.eps, self.tau, self.macro_dt, self.t_end)?;
        micro_half_steps(self.tau, self.micro_dt)?;
        macro_steps(self.t_end, self.macro_dt)?;
        if self.beta == 0.0 || !self.beta.is_finite() {
            return Err(Error::Parameter(format!("beta = {} must be finite and nonzero", self.beta)));
        }
        if !self.gamma.is_finite() {
            return Err(Error::Parameter(format!("gamma = {} must be finite", self.gamma)));
        }
        Spin::new(self.m0)?;
        self.midpoint.validate()?;
        validate_macro_solver(self.macro_fp_tol, self.macro_fp_max_iter)
    }

    /// Number of micro steps in each half window.
    pub fn half_steps(&self) -> usize {
        micro_half_steps(self.tau, self.micro_dt).unwrap_or(0)
    }

    /// Samples per micro trajectory, `tau / micro_dt + 1`.
    pub fn samples_per_micro_solve(&self) -> usize {
        2 * self.half_steps() + 1
    }
}

pub(crate) fn validate_scales(eps: f64, tau: f64, macro_dt: f64, t_end: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!("eps = {eps} must be positive")));
    }
    if !(tau > eps) {
        return Err(Error::Parameter(format!("tau must exceed eps (tau = {tau}, eps = {eps})")));
    }
    if !(macro_dt > tau) {
        return Err(Error::Parameter(format!(
            "macro_dt must exceed tau (macro_dt = {macro_dt}, tau = {tau})"
        )));
    }
    if !(t_end >= macro_dt) || !t_end.is_finite() {
        return Err(Error::Parameter(format!(
            "T must be at least macro_dt (T = {t_end}, macro_dt = {macro_dt})"
        )));
    }
    Ok(())
}

pub(crate) fn validate_macro_solver(tol: f64, max_iter: usize) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("macro_fp_tol = {tol} must be positive")));
    }
    if max_iter < 1 {
        return Err(Error::Parameter("macro_fp_max_iter must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn micro_half_steps(tau: f64, micro_dt: f64) -> Result<usize> {
    commensurate_steps(tau / 2.0, micro_dt).filter(|&n| n > 0).ok_or_else(|| {
        Error::Parameter(format!("micro_dt = {micro_dt} must divide tau/2 = {}", tau / 2.0))
    })
}

pub(crate) fn macro_steps(t_end: f64, macro_dt: f64) -> Result<usize> {
    commensurate_steps(t_end, macro_dt).filter(|&n| n > 0).ok_or_else(|| {
        Error::Parameter(format!("T = {t_end} must be an integer multiple of macro_dt = {macro_dt}"))
    })
}

/// Joins a backward run over `[0, -tau/2]` and a forward run over
/// `[0, tau/2]` into one ascending trajectory.
pub(crate) fn merge_windows<S>(backward: Trajectory<S>, forward: Trajectory<S>) -> Trajectory<S> {
    let mut times: Vec<f64> = backward.times.into_iter().rev().collect();
    let mut states: Vec<S> = backward.states.into_iter().rev().collect();
    times.pop();
    states.pop();
    times.extend(forward.times);
    states.extend(forward.states);
    Trajectory { times, states }
}

/// Solves the micro problem around `t_a` from `m(0) = m`. Times in the
/// returned trajectory are window offsets `s in [-tau/2, tau/2]`.
pub fn micro_solve(t_a: f64, m: Vec3, cfg: &HmmConfig) -> Result<Trajectory<Vec3>> {
    if !(m.norm() > 0.0) {
        return Err(Error::Parameter("micro initial data must be nonzero".into()));
    }
    let (eps, beta) = (cfg.eps, cfg.beta);
    let field = &cfg.field;
    let rhs = |s: f64, m: &Vec3| precession_rhs(*m, field.at(s + t_a, eps), beta);
    let half = cfg.tau / 2.0;
    let backward = integrate(&rhs, 0.0, m, -half, cfg.micro_dt, &cfg.midpoint)?;
    let forward = integrate(&rhs, 0.0, m, half, cfg.micro_dt, &cfg.midpoint)?;
    Ok(merge_windows(backward, forward))
}

/// Kernel average of the micro derivative, `int K_tau(s) m'(s) ds`, with
/// `m'` taken from the right-hand side at each sample.
pub fn upscale(traj: &Trajectory<Vec3>, t_a: f64, cfg: &HmmConfig) -> Result<Vec3> {
    let n = traj.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::Parameter(format!("micro trajectory has {n} samples, need an odd count >= 3")));
    }
    let weights = cfg.kernel.scaled(cfg.tau)?.trapezoid_weights((n - 1) / 2);
    let mut flux = Vec3::ZERO;
    for ((w, s), m) in weights.iter().zip(&traj.times).zip(&traj.states) {
        if *w != 0.0 {
            flux += precession_rhs(*m, cfg.field.at(s + t_a, cfg.eps), cfg.beta) * *w;
        }
    }
    Ok(flux)
}

/// Micro solve followed by upscaling.
pub fn flux(t_a: f64, m: Vec3, cfg: &HmmConfig) -> Result<Vec3> {
    let data = if cfg.normalize_micro_data {
        m.normalized().ok_or(Error::DegenerateInterpolant { norm: m.norm() })?
    } else {
        m
    };
    upscale(&micro_solve(t_a, data, cfg)?, t_a, cfg)
}

/// Result of one macro step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroStep {
    pub m_next: Vec3,
    pub flux: Vec3,
    pub iters: usize,
}

/// The damped midpoint update `M + dt F + (gamma / beta) dt M_half x F`.
#[inline]
pub(crate) fn macro_update(m: Vec3, half: Vec3, flux: Vec3, dt: f64, damping: f64) -> Vec3 {
    m + flux * dt + cross(half, flux) * (damping * dt)
}

/// Advances `m_n` at `t_n` by one macro step. Each outer fixed-point
/// iteration re-solves the micro problem at the current midpoint state.
pub fn macro_step(t_n: f64, m_n: Vec3, cfg: &HmmConfig) -> Result<MacroStep> {
    let dt = cfg.macro_dt;
    let t_half = t_n + 0.5 * dt;
    let damping = cfg.gamma / cfg.beta;
    let mut next = m_n;
    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.macro_fp_max_iter {
        let half = (m_n + next) * 0.5;
        let f = flux(t_half, half, cfg)?;
        let updated = macro_update(m_n, half, f, dt, damping);
        residual = (updated - next).max_abs();
        next = updated;
        if residual <= cfg.macro_fp_tol {
            return Ok(MacroStep { m_next: next, flux: f, iters: iter });
        }
    }
    Err(Error::MacroNonConverged { step: 0, cell: None, residual })
}

/// Macro solution with per-step diagnostics. `fluxes[n]` and `iters[n]`
/// belong to the step from `times[n]` to `times[n + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec3>,
    pub fluxes: Vec<Vec3>,
    pub iters: Vec<usize>,
    /// Micro samples computed over the run, `sum_n iters_n (tau / micro_dt + 1)`,
    /// one right-hand side evaluation each.
    pub micro_samples: usize,
}

impl MacroTrajectory {
    pub fn total_iters(&self) -> usize {
        self.iters.iter().sum()
    }
}

pub fn run(cfg: &HmmConfig) -> Result<MacroTrajectory> {
    cfg.validate()?;
    let n = macro_steps(cfg.t_end, cfg.macro_dt)?;
    let mut out = MacroTrajectory {
        times: vec![0.0],
        states: vec![cfg.m0],
        fluxes: Vec::with_capacity(n),
        iters: Vec::with_capacity(n),
        micro_samples: 0,
    };
    let mut m = cfg.m0;
    for k in 0..n {
        let t = k as f64 * cfg.macro_dt;
        let step = macro_step(t, m, cfg).map_err(|e| e.at_macro_step(k))?;
        m = step.m_next;
        out.times.push((k + 1) as f64 * cfg.macro_dt);
        out.states.push(m);
        out.fluxes.push(step.flux);
        out.iters.push(step.iters);
        out.micro_samples += step.iters * cfg.samples_per_micro_solve();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NamedField;
    use std::f64::consts::PI;

    fn config(field: NamedField, eps: f64, tau: f64, kernel: (u32, i32)) -> HmmConfig {
        let kernel = KernelSpec::build(kernel.0, kernel.1).unwrap();
        HmmConfig::new(eps, tau, 0.1 * PI, 2.0 * PI, kernel, field.into(), Vec3::E_X)
    }

    #[test]
    fn validation_rejects_bad_orderings() {
        let mut c = config(NamedField::Circular, 0.01, 0.05, (5, 4));
        assert!(c.validate().is_ok());
        c.tau = 0.005;
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("tau must exceed eps"), "{err}");
        c.tau = 0.5;
        assert!(c.validate().is_err());
        c.tau = 0.05;
        c.micro_dt = 0.0003;
        assert!(c.validate().is_err());
        c.micro_dt = 1e-4;
        c.t_end = 1.0;
        assert!(c.validate().is_err());
        c.t_end = 2.0 * PI;
        c.beta = 0.0;
        assert!(c.validate().is_err());
        c.beta = 1.0;
        c.m0 = Vec3::new(1.0, 1.0, 0.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn micro_solve_aligned_state_is_stationary() {
        let h = Vec3::new(0.0, 0.6, 0.8);
        let c = config(NamedField::Constant(h), 0.01, 0.05, (5, 4));
        let traj = micro_solve(0.3, h, &c).unwrap();
        assert_eq!(traj.len(), c.samples_per_micro_solve());
        assert!(traj.states.iter().all(|m| (*m - h).max_abs() <= 1e-15));
    }

    #[test]
    fn micro_solve_matches_closed_form_precession() {
        let c = config(NamedField::Constant(Vec3::E_Z), 0.01, 0.05, (5, 4));
        let traj = micro_solve(0.0, Vec3::E_X, &c).unwrap();
        assert_eq!(traj.times[0], -0.025);
        assert_eq!(*traj.times.last().unwrap(), 0.025);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        for (s, m) in traj.times.iter().zip(&traj.states) {
            let exact = Vec3::new(s.cos(), s.sin(), 0.0);
            assert!((*m - exact).max_abs() <= 1e-9);
        }
    }

    #[test]
    fn micro_solve_conserves_norm() {
        let c = config(NamedField::Squared, 0.01, 0.053, (1, 7));
        let m = Vec3::new(0.3, -0.5, 0.7);
        let traj = micro_solve(1.234, m, &c).unwrap();
        for s in &traj.states {
            assert!((s.norm() - m.norm()).abs() <= 1e-10);
        }
    }

    #[test]
    fn upscale_aligned_is_zero() {
        let h = Vec3::new(1.0, -2.0, 0.5);
        let c = config(NamedField::Constant(h), 0.01, 0.05, (5, 4));
        let m = h.normalized().unwrap();
        let f = flux(0.0, m, &c).unwrap();
        assert!(f.max_abs() <= 1e-12);
    }

    #[test]
    fn upscale_approximates_effective_precession() {
        let eps = 0.01;
        let c = config(NamedField::CircularCos, eps, 5.3 * eps, (1, 7));
        let m = Vec3::E_Z;
        let f = flux(0.0, m, &c).unwrap();
        let target = -cross(m, Vec3::E_Z);
        assert!((f - target).norm() <= 10.0 * eps, "{f}");
    }

    #[test]
    fn flux_is_linear_in_amplitude() {
        let c = config(NamedField::Circular, 0.01, 0.053, (1, 7));
        let m = Vec3::new(0.6, 0.0, 0.8);
        let f1 = flux(0.7, m, &c).unwrap();
        let f2 = flux(0.7, m * 2.0, &c).unwrap();
        assert!((f2 - f1 * 2.0).max_abs() <= 1e-10);
    }

    #[test]
    fn macro_step_keeps_aligned_state() {
        let h = Vec3::new(0.0, 0.0, 2.0);
        let c = config(NamedField::Constant(h), 0.01, 0.05, (5, 4));
        let step = macro_step(0.0, Vec3::E_Z, &c).unwrap();
        assert!((step.m_next - Vec3::E_Z).max_abs() <= 1e-10);
    }

    #[test]
    fn undamped_macro_step_nearly_conserves_length() {
        let eps = 0.01;
        let mut c = config(NamedField::CircularCos, eps, 5.3 * eps, (1, 7));
        c.gamma = 0.0;
        let m = Vec3::new(1.0, 1.0, 1.0).normalized().unwrap();
        let step = macro_step(0.0, m, &c).unwrap();
        // |M_{n+1}|^2 - |M_n|^2 = 2 dt <M_half, F>, and <M_half, F> equals the
        // upscaling error since the exact flux is orthogonal to M_half.
        let half = (m + step.m_next) * 0.5;
        let exact = -cross(half, Vec3::E_Z);
        let bound = 10.0 * c.macro_fp_tol + (step.flux - exact).norm() * c.macro_dt;
        assert!((step.m_next.norm() - m.norm()).abs() <= bound);
    }

    #[test]
    fn macro_step_close_to_effective_step() {
        let eps = 0.01;
        let c = config(NamedField::CircularCos, eps, 5.3 * eps, (1, 7));
        let step = macro_step(0.0, Vec3::E_Z, &c).unwrap();
        let bound = 10.0 * (c.tau + (eps / c.tau).powi(9)) * c.macro_dt;
        assert!((step.m_next - Vec3::E_Z).norm() <= bound);
    }

    #[test]
    fn run_records_diagnostics() {
        let eps = 0.02;
        let mut c = config(NamedField::Circular, eps, 5.0 * eps, (5, 4));
        c.micro_dt = eps / 20.0;
        c.t_end = 0.4 * PI;
        let out = run(&c).unwrap();
        assert_eq!(out.states[0], c.m0);
        assert_eq!(out.states.len(), 5);
        assert_eq!(out.fluxes.len(), 4);
        assert_eq!(out.micro_samples, out.total_iters() * 101);
        assert!(out.iters.iter().all(|&k| k >= 2));
    }

    #[test]
    fn macro_non_convergence_reports_step() {
        let eps = 0.02;
        let mut c = config(NamedField::Circular, eps, 5.0 * eps, (5, 4));
        c.micro_dt = eps / 20.0;
        c.macro_fp_max_iter = 2;
        match run(&c) {
            Err(Error::MacroNonConverged { step, cell, .. }) => {
                assert_eq!(step, 0);
                assert_eq!(cell, None);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn normalized_micro_data_uses_unit_vector() {
        let mut c = config(NamedField::Circular, 0.01, 0.05, (5, 4));
        let m = Vec3::new(0.0, 0.9, 0.9);
        let raw = flux(0.2, m, &c).unwrap();
        c.normalize_micro_data = true;
        let unit = flux(0.2, m, &c).unwrap();
        assert!((raw / m.norm() - unit).max_abs() <= 1e-12);
    }
}
