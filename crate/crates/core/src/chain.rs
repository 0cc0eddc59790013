//! Spatio-temporal HMM for a periodic chain of exchange-coupled spins.
//!
//! The chain has `N = (r + ell) L` spins at `x_i = i dx`. Macro values
//! `M_I` live at `X_I = I (r + ell) dx`. To estimate the flux at `X_I`, the
//! patch of `2 r + 1` spins around `X_I` is initialized from the normalized
//! quadratic interpolant of `M_{I-1}, M_I, M_{I+1}`, evolved without damping
//! over the time window with its two end spins held fixed, and averaged
//! against `K_eta` in space and `K_tau` in time.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::hmm::{
    macro_steps, macro_update, merge_windows, micro_half_steps, validate_macro_solver,
    validate_scales,
};
use crate::integrator::{integrate, MidpointConfig, Trajectory};
use crate::kernel::KernelSpec;
use crate::vec3::{precession_rhs, Vec3};

pub type ChainTrajectory = Trajectory<Vec<Vec3>>;

/// Below this length the interpolant is treated as vanishing.
const DEGENERATE_NORM: f64 = 1e-12;

/// Initial spin configuration.
#[derive(Clone)]
pub enum ChainInitial {
    /// Every spin equal to the given vector.
    Uniform(Vec3),
    /// `m_i = (sin 2 pi x_i, cos 2 pi x_i, 0)`.
    Helix,
    /// Spins given by a function of position.
    Function(Arc<dyn Fn(f64) -> Vec3 + Send + Sync>),
    /// Explicit spins, one per site.
    Spins(Vec<Vec3>),
}

impl fmt::Debug for ChainInitial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainInitial::Uniform(u) => write!(f, "Uniform({u})"),
            ChainInitial::Helix => f.write_str("Helix"),
            ChainInitial::Function(_) => f.write_str("Function(..)"),
            ChainInitial::Spins(s) => write!(f, "Spins([{} spins])", s.len()),
        }
    }
}

impl ChainInitial {
    pub fn name(&self) -> &'static str {
        match self {
            ChainInitial::Uniform(_) => "uniform",
            ChainInitial::Helix => "helix",
            ChainInitial::Function(_) => "function",
            ChainInitial::Spins(_) => "spins",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub n: usize,
    pub l: usize,
    pub r: usize,
    pub ell: usize,
    pub dx: f64,
    pub j_exchange: f64,
    pub eps: f64,
    pub tau: f64,
    pub macro_dt: f64,
    pub micro_dt: f64,
    pub beta: f64,
    pub gamma: f64,
    pub t_end: f64,
    pub kernel_time: KernelSpec,
    pub kernel_space: KernelSpec,
    pub field: FieldSpec,
    pub initial: ChainInitial,
    pub midpoint: MidpointConfig,
    pub macro_fp_tol: f64,
    pub macro_fp_max_iter: usize,
    /// Solve the `L` micro problems of an outer iteration on the rayon pool.
    pub parallel: bool,
}

impl ChainConfig {
    /// The experiment chain: `N = 100`, `L = 10`, `r = ell = 5`, `dx = 0.01`,
    /// `J = 1`, `eps = 0.01`, `tau = 5 eps`, `T = 1.5`, `macro_dt = T / 20`,
    /// `beta = gamma = 1`, kernel (5, 4) in time and space, pulsed field and
    /// helical initial data.
    pub fn experiment() -> Self {
        let eps = 0.01;
        let kernel = KernelSpec::build(5, 4).expect("(5, 4) kernel");
        ChainConfig {
            n: 100,
            l: 10,
            r: 5,
            ell: 5,
            dx: 0.01,
            j_exchange: 1.0,
            eps,
            tau: 5.0 * eps,
            macro_dt: 1.5 / 20.0,
            micro_dt: eps / 100.0,
            beta: 1.0,
            gamma: 1.0,
            t_end: 1.5,
            kernel_time: kernel.clone(),
            kernel_space: kernel,
            field: crate::field::NamedField::ChainPulse.into(),
            initial: ChainInitial::Helix,
            midpoint: MidpointConfig::default(),
            macro_fp_tol: 1e-10,
            macro_fp_max_iter: 50,
            parallel: true,
        }
    }

    /// Particles per macro cell, `r' = r + ell`.
    pub fn stride(&self) -> usize {
        self.r + self.ell
    }

    /// Spatial averaging window `eta = 2 r dx`.
    pub fn eta(&self) -> f64 {
        2.0 * self.r as f64 * self.dx
    }

    pub fn site_x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn macro_x(&self, cell: usize) -> f64 {
        (cell * self.stride()) as f64 * self.dx
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::Parameter("r must be positive".into()));
        }
        if self.l < 3 {
            return Err(Error::Parameter(format!("L = {} must be at least 3", self.l)));
        }
        if self.n != self.stride() * self.l {
            return Err(Error::Parameter(format!(
                "N = {} must equal (r + ell) L = {}",
                self.n,
                self.stride() * self.l
            )));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(Error::Parameter(format!("dx = {} must be positive", self.dx)));
        }
        if !self.j_exchange.is_finite() || !self.gamma.is_finite() {
            return Err(Error::Parameter("J and gamma must be finite".into()));
        }
        if self.beta == 0.0 || !self.beta.is_finite() {
            return Err(Error::Parameter(format!("beta = {} must be finite and nonzero", self.beta)));
        }
        validate_scales(self.eps, self.tau, self.macro_dt, self.t_end)?;
        micro_half_steps(self.tau, self.micro_dt)?;
        macro_steps(self.t_end, self.macro_dt)?;
        self.midpoint.validate()?;
        validate_macro_solver(self.macro_fp_tol, self.macro_fp_max_iter)?;
        if let ChainInitial::Spins(s) = &self.initial {
            if s.len() != self.n {
                return Err(Error::Parameter(format!(
                    "initial data has {} spins, expected N = {}",
                    s.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Initial spins of the full chain.
    pub fn initial_spins(&self) -> Vec<Vec3> {
        match &self.initial {
            ChainInitial::Uniform(u) => vec![*u; self.n],
            ChainInitial::Helix => (0..self.n)
                .map(|i| {
                    let phase = 2.0 * PI * self.site_x(i);
                    Vec3::new(phase.sin(), phase.cos(), 0.0)
                })
                .collect(),
            ChainInitial::Function(f) => (0..self.n).map(|i| f(self.site_x(i))).collect(),
            ChainInitial::Spins(s) => s.clone(),
        }
    }

    /// Normalized spatial weights `K_eta(j dx) dx` for `j = -r..=r`, sampled
    /// at the exact fractions `j / (2 r)`.
    pub fn spatial_weights(&self) -> Vec<f64> {
        let r = self.r as i64;
        let raw: Vec<f64> = (-r..=r)
            .map(|j| self.kernel_space.eval(j as f64 / (2 * r) as f64))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|w| w / total).collect()
    }

    fn wrap(&self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }
}

/// Macro values at the coarse points `X_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroChainState {
    pub values: Vec<Vec3>,
}

/// Total field on site `i`: `J (m_{i-1} + m_{i+1}) + H(t, t / eps)`.
pub fn exchange_field(state: &[Vec3], i: usize, t: f64, cfg: &ChainConfig) -> Vec3 {
    let n = state.len() as i64;
    let i = i as i64;
    let left = state[(i - 1).rem_euclid(n) as usize];
    let right = state[(i + 1).rem_euclid(n) as usize];
    (left + right) * cfg.j_exchange + cfg.field.at(t, cfg.eps)
}

/// Normalized quadratic interpolant through `(-h, left)`, `(0, center)`,
/// `(h, right)` evaluated at `offset`.
pub fn interpolate_macro(left: Vec3, center: Vec3, right: Vec3, offset: f64, h: f64) -> Result<Vec3> {
    let s = offset / h;
    let value = left * (0.5 * s * (s - 1.0)) + center * (1.0 - s * s) + right * (0.5 * s * (s + 1.0));
    let norm = value.norm();
    if !(norm >= DEGENERATE_NORM) {
        return Err(Error::DegenerateInterpolant { norm });
    }
    Ok(value / norm)
}

fn neighbors(macro_state: &MacroChainState, cell: usize) -> (Vec3, Vec3, Vec3) {
    let l = macro_state.values.len();
    (
        macro_state.values[(cell + l - 1) % l],
        macro_state.values[cell],
        macro_state.values[(cell + 1) % l],
    )
}

/// Patch initial data `M_hat(x_{I r' + j})` for `j = -r..=r`.
pub fn patch_initial(cell: usize, macro_state: &MacroChainState, cfg: &ChainConfig) -> Result<Vec<Vec3>> {
    let (left, center, right) = neighbors(macro_state, cell);
    let h = cfg.stride() as f64 * cfg.dx;
    let r = cfg.r as i64;
    (-r..=r)
        .map(|j| interpolate_macro(left, center, right, j as f64 * cfg.dx, h))
        .collect()
}

/// Precession-only micro problem on the patch of `cell`. The end spins keep
/// their initial values. Times are window offsets in `[-tau/2, tau/2]`.
pub fn chain_micro_solve(
    cell: usize,
    t_a: f64,
    macro_state: &MacroChainState,
    cfg: &ChainConfig,
) -> Result<ChainTrajectory> {
    let init = patch_initial(cell, macro_state, cfg)?;
    let rhs = |s: f64, m: &Vec<Vec3>| patch_rhs(s + t_a, m, cfg);
    let half = cfg.tau / 2.0;
    let backward = integrate(&rhs, 0.0, init.clone(), -half, cfg.micro_dt, &cfg.midpoint)?;
    let forward = integrate(&rhs, 0.0, init, half, cfg.micro_dt, &cfg.midpoint)?;
    Ok(merge_windows(backward, forward))
}

fn patch_rhs(t: f64, m: &[Vec3], cfg: &ChainConfig) -> Vec<Vec3> {
    let external = cfg.field.at(t, cfg.eps);
    let last = m.len() - 1;
    let mut out = vec![Vec3::ZERO; m.len()];
    for j in 1..last {
        let h = (m[j - 1] + m[j + 1]) * cfg.j_exchange + external;
        out[j] = precession_rhs(m[j], h, cfg.beta);
    }
    out
}

/// Spatio-temporal kernel average of the patch derivative.
pub fn chain_upscale(traj: &ChainTrajectory, t_a: f64, cfg: &ChainConfig) -> Result<Vec3> {
    let n = traj.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::Parameter(format!("micro trajectory has {n} samples, need an odd count >= 3")));
    }
    let w_time = cfg.kernel_time.scaled(cfg.tau)?.trapezoid_weights((n - 1) / 2);
    let w_space = cfg.spatial_weights();
    let mut flux = Vec3::ZERO;
    for ((wt, s), m) in w_time.iter().zip(&traj.times).zip(&traj.states) {
        if *wt == 0.0 {
            continue;
        }
        let rate = patch_rhs(s + t_a, m, cfg);
        let mut avg = Vec3::ZERO;
        for (ws, v) in w_space.iter().zip(&rate) {
            avg += *v * *ws;
        }
        flux += avg * *wt;
    }
    Ok(flux)
}

/// Fluxes of all cells at `t_a`, gathered in cell order.
pub fn chain_fluxes(t_a: f64, macro_state: &MacroChainState, cfg: &ChainConfig) -> Result<Vec<Vec3>> {
    let one = |cell: usize| -> Result<Vec3> {
        let traj = chain_micro_solve(cell, t_a, macro_state, cfg)?;
        chain_upscale(&traj, t_a, cfg)
    };
    if cfg.parallel {
        (0..cfg.l).into_par_iter().map(one).collect()
    } else {
        (0..cfg.l).map(one).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep {
    pub next: MacroChainState,
    pub fluxes: Vec<Vec3>,
    pub iters: usize,
}

/// One macro step for all cells, with a joint outer fixed point.
pub fn chain_macro_step(t_n: f64, m_n: &MacroChainState, cfg: &ChainConfig) -> Result<ChainStep> {
    let dt = cfg.macro_dt;
    let t_half = t_n + 0.5 * dt;
    let damping = cfg.gamma / cfg.beta;
    let mut next = m_n.clone();
    let mut worst = (0usize, f64::INFINITY);
    for iter in 1..=cfg.macro_fp_max_iter {
        let half = MacroChainState {
            values: m_n.values.iter().zip(&next.values).map(|(a, b)| (*a + *b) * 0.5).collect(),
        };
        let fluxes = chain_fluxes(t_half, &half, cfg)?;
        let updated: Vec<Vec3> = (0..cfg.l)
            .map(|c| macro_update(m_n.values[c], half.values[c], fluxes[c], dt, damping))
            .collect();
        worst = (0, 0.0);
        for (c, (u, v)) in updated.iter().zip(&next.values).enumerate() {
            let d = (*u - *v).max_abs();
            if d > worst.1 {
                worst = (c, d);
            }
        }
        next = MacroChainState { values: updated };
        if worst.1 <= cfg.macro_fp_tol {
            return Ok(ChainStep { next, fluxes, iters: iter });
        }
    }
    Err(Error::MacroNonConverged { step: 0, cell: Some(worst.0), residual: worst.1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub times: Vec<f64>,
    pub states: Vec<MacroChainState>,
    pub iters: Vec<usize>,
}

pub fn chain_run(cfg: &ChainConfig) -> Result<ChainRun> {
    cfg.validate()?;
    let steps = macro_steps(cfg.t_end, cfg.macro_dt)?;
    let init = cfg.initial_spins();
    let m0 = MacroChainState {
        values: (0..cfg.l).map(|c| macro_average_spatial(&init, c, cfg)).collect(),
    };
    let mut out = ChainRun { times: vec![0.0], states: vec![m0.clone()], iters: Vec::with_capacity(steps) };
    let mut m = m0;
    for k in 0..steps {
        let step = chain_macro_step(k as f64 * cfg.macro_dt, &m, cfg).map_err(|e| e.at_macro_step(k))?;
        m = step.next;
        out.times.push((k + 1) as f64 * cfg.macro_dt);
        out.states.push(m.clone());
        out.iters.push(step.iters);
    }
    Ok(out)
}

/// Spatial kernel average of a chain state around `X_I`.
pub fn macro_average_spatial(state: &[Vec3], cell: usize, cfg: &ChainConfig) -> Vec3 {
    let center = (cell * cfg.stride()) as i64;
    let r = cfg.r as i64;
    let mut acc = Vec3::ZERO;
    for (w, j) in cfg.spatial_weights().iter().zip(-r..=r) {
        acc += state[cfg.wrap(center + j)] * *w;
    }
    acc
}

/// Spatio-temporal kernel average of a chain trajectory around `(X_I, t)`.
/// The trajectory must be uniformly sampled with a step dividing `tau / 2`
/// and cover `[t - tau/2, t + tau/2]`. The temporal trapezoid weights are
/// rescaled to sum to one.
pub fn macro_average(traj: &ChainTrajectory, cell: usize, t: f64, cfg: &ChainConfig) -> Result<Vec3> {
    let (t0, t_last) = match (traj.times.first(), traj.times.last()) {
        (Some(a), Some(b)) if traj.len() >= 2 => (*a, *b),
        _ => return Err(Error::Parameter("trajectory needs at least two samples".into())),
    };
    let half = cfg.tau / 2.0;
    let out_of_range = || Error::WindowOutOfRange {
        need_start: t - half,
        need_end: t + half,
        have_start: t0,
        have_end: t_last,
    };
    let dt = traj.times[1] - traj.times[0];
    let half_steps = micro_half_steps(cfg.tau, dt)?;
    let center = (t - t0) / dt;
    let k = center.round();
    if (center - k).abs() > 1e-6 || k < half_steps as f64 || k as usize + half_steps >= traj.len() {
        return Err(out_of_range());
    }
    let k = k as usize;
    // Renormalized like the spatial weights, so data constant in time is
    // reproduced exactly.
    let weights = cfg.kernel_time.scaled(cfg.tau)?.trapezoid_weights(half_steps);
    let total: f64 = weights.iter().sum();
    let mut acc = Vec3::ZERO;
    for (w, state) in weights.iter().zip(&traj.states[k - half_steps..=k + half_steps]) {
        acc += macro_average_spatial(state, cell, cfg) * (*w / total);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::NamedField;
    use crate::hmm::{self, HmmConfig};

    fn small(initial: ChainInitial, field: NamedField, j: f64) -> ChainConfig {
        let mut c = ChainConfig::experiment();
        c.initial = initial;
        c.field = field.into();
        c.j_exchange = j;
        c.micro_dt = c.eps / 20.0;
        c.t_end = 0.15;
        c.macro_dt = 0.075;
        c
    }

    #[test]
    fn experiment_config_is_valid() {
        let c = ChainConfig::experiment();
        c.validate().unwrap();
        assert_eq!(c.stride(), 10);
        assert!((c.eta() - 0.1).abs() < 1e-15);
        assert!((c.macro_x(3) - 0.3).abs() < 1e-15);
        let mut bad = c.clone();
        bad.n = 99;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn exchange_field_hand_values() {
        let mut c = ChainConfig::experiment();
        c.field = NamedField::Constant(Vec3::ZERO).into();
        c.j_exchange = 0.7;
        let u = Vec3::new(0.0, 0.6, 0.8);
        let uniform = vec![u; 10];
        assert!((exchange_field(&uniform, 0, 0.3, &c) - u * 1.4).max_abs() < 1e-15);
        let alternating: Vec<Vec3> = (0..10).map(|i| if i % 2 == 0 { u } else { -u }).collect();
        for i in 0..10 {
            let expect = -alternating[i] * 1.4;
            assert!((exchange_field(&alternating, i, 0.0, &c) - expect).max_abs() < 1e-15);
        }
        c.j_exchange = 0.0;
        c.field = NamedField::Circular.into();
        assert_eq!(exchange_field(&alternating, 3, 0.0, &c), Vec3::new(0.0, 1.0, 1.0));
    }

    #[test]
    fn interpolation_properties() {
        let u = Vec3::new(0.0, 0.6, 0.8);
        for s in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((interpolate_macro(u, u, u, s * 0.1, 0.1).unwrap() - u).max_abs() < 1e-15);
        }
        let c = Vec3::new(0.0, 1.2, 1.6);
        assert!((interpolate_macro(u, c, u * 3.0, 0.0, 0.1).unwrap() - u).max_abs() < 1e-15);
        // 0.9u, u, 1.1u interpolate to (1 + 0.1 s) u, which normalizes to u.
        for s in [-0.5, -0.2, 0.0, 0.4, 0.5] {
            let v = interpolate_macro(u * 0.9, u, u * 1.1, s * 0.1, 0.1).unwrap();
            assert!((v - u).max_abs() < 1e-15);
            assert!((v.norm() - 1.0).abs() < 1e-15);
        }
        let err = interpolate_macro(-u, Vec3::ZERO, u, 0.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::DegenerateInterpolant { .. }));
    }

    #[test]
    fn spatial_weights_normalized_and_symmetric() {
        let c = ChainConfig::experiment();
        let w = c.spatial_weights();
        assert_eq!(w.len(), 11);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for j in 0..11 {
            assert_eq!(w[j], w[10 - j]);
        }
        assert_eq!(w[0], 0.0);
    }

    #[test]
    fn aligned_patch_is_stationary() {
        let c = small(ChainInitial::Uniform(Vec3::E_Z), NamedField::ChainPulse, 1.0);
        let state = MacroChainState { values: vec![Vec3::E_Z; c.l] };
        let traj = chain_micro_solve(4, 0.2, &state, &c).unwrap();
        for spins in &traj.states {
            assert!(spins.iter().all(|m| (*m - Vec3::E_Z).max_abs() == 0.0));
        }
        assert!(chain_upscale(&traj, 0.2, &c).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn decoupled_patch_matches_single_spin_micro() {
        let c = small(ChainInitial::Helix, NamedField::Circular, 0.0);
        let values: Vec<Vec3> = (0..c.l)
            .map(|i| {
                let a = 0.5 * i as f64;
                Vec3::new(a.cos(), a.sin(), 0.5)
            })
            .collect();
        let state = MacroChainState { values };
        let traj = chain_micro_solve(2, 0.1, &state, &c).unwrap();
        let init = patch_initial(2, &state, &c).unwrap();
        let mut single = HmmConfig::new(
            c.eps, c.tau, c.macro_dt, c.t_end, c.kernel_time.clone(), c.field.clone(), Vec3::E_Z,
        );
        single.micro_dt = c.micro_dt;
        for j in 1..2 * c.r {
            let reference = hmm::micro_solve(0.1, init[j], &single).unwrap();
            for (k, spins) in traj.states.iter().enumerate() {
                assert!((spins[j] - reference.states[k]).max_abs() <= 1e-12);
            }
        }
        for spins in &traj.states {
            assert_eq!(spins[0], init[0]);
            for j in 1..2 * c.r {
                assert!((spins[j].norm() - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn decoupled_uniform_flux_matches_single_spin() {
        let c = small(ChainInitial::Helix, NamedField::Circular, 0.0);
        let m = Vec3::new(0.3, 0.4, 0.5);
        let state = MacroChainState { values: vec![m; c.l] };
        let mut single = HmmConfig::new(
            c.eps, c.tau, c.macro_dt, c.t_end, c.kernel_time.clone(), c.field.clone(), Vec3::E_Z,
        );
        single.micro_dt = c.micro_dt;
        single.normalize_micro_data = true;
        let expect = hmm::flux(0.4, m, &single).unwrap();
        let fluxes = chain_fluxes(0.4, &state, &c).unwrap();
        for f in fluxes {
            assert!((f - expect).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn macro_averages_of_simple_states() {
        let c = ChainConfig::experiment();
        let u = Vec3::new(0.0, 0.6, 0.8);
        let uniform = vec![u; c.n];
        assert!((macro_average_spatial(&uniform, 3, &c) - u).max_abs() < 1e-15);
        // A state linear in x is reproduced at X_I by the symmetric weights.
        let linear: Vec<Vec3> = (0..c.n).map(|i| Vec3::new(c.site_x(i), 1.0, 0.0)).collect();
        let avg = macro_average_spatial(&linear, 4, &c);
        assert!((avg - Vec3::new(c.macro_x(4), 1.0, 0.0)).max_abs() < 1e-14);
        // Constant-in-time trajectories reduce to the spatial average.
        let traj = Trajectory {
            times: (0..=200).map(|k| k as f64 * c.eps / 20.0).collect(),
            states: vec![linear.clone(); 201],
        };
        let t = 100.0 * c.eps / 20.0;
        let st = macro_average(&traj, 4, t, &c).unwrap();
        assert!((st - avg).max_abs() < 1e-10, "{st} vs {avg}");
        assert!(matches!(
            macro_average(&traj, 4, 0.0, &c),
            Err(Error::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn uniform_aligned_chain_is_constant() {
        let c = small(ChainInitial::Uniform(Vec3::E_Z), NamedField::ChainPulse, 1.0);
        let run = chain_run(&c).unwrap();
        for state in &run.states {
            for v in &state.values {
                assert!((*v - Vec3::E_Z).max_abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn uniform_data_gives_identical_cells() {
        let u = Vec3::new(1.0, 0.0, 1.0).normalized().unwrap();
        let c = small(ChainInitial::Uniform(u), NamedField::ChainPulse, 1.0);
        let run = chain_run(&c).unwrap();
        for state in &run.states {
            for v in &state.values {
                assert!((*v - state.values[0]).max_abs() <= 1e-12);
            }
        }
        assert!((run.states.last().unwrap().values[0] - u).max_abs() > 1e-3);
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let mut c = small(ChainInitial::Helix, NamedField::ChainPulse, 1.0);
        c.t_end = 0.075;
        let par = chain_run(&c).unwrap();
        c.parallel = false;
        let seq = chain_run(&c).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn rotating_initial_data_rotates_macro_solution() {
        let mut c = small(ChainInitial::Helix, NamedField::ChainPulse, 1.0);
        c.t_end = 0.075;
        let spins = c.initial_spins();
        let base = chain_run(&c).unwrap();
        let shift = c.stride();
        let rotated: Vec<Vec3> = (0..c.n).map(|i| spins[(i + shift) % c.n]).collect();
        c.initial = ChainInitial::Spins(rotated);
        let moved = chain_run(&c).unwrap();
        for (a, b) in base.states.iter().zip(&moved.states) {
            for cell in 0..c.l {
                let d = (a.values[(cell + 1) % c.l] - b.values[cell]).max_abs();
                assert!(d <= 1e-10, "cell {cell}: {d}");
            }
        }
    }
}
