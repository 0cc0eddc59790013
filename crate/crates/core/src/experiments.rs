//! Convergence experiments and their error tables.
//!
//! Each experiment is deterministic; sweeps run their rows on the rayon pool
//! and gather them in parameter order.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::chain::{chain_run, macro_average, macro_average_spatial, ChainConfig, ChainRun};
use crate::error::{Error, Result};
use crate::field::{FieldSpec, NamedField};
use crate::hmm::{self, HmmConfig, MacroTrajectory};
use crate::integrator::MidpointConfig;
use crate::kernel::KernelSpec;
use crate::output::{num, vec_cells, CsvTable};
use crate::reference::{
    dns_chain, dns_single_strided, dns_step_for, effective_solve, m1_series, scaled_micro,
    DnsConfig,
};
use crate::vec3::{cross, Vec3};

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::NonPositiveData);
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::NonPositiveData);
    }
    Ok(sxy / sxx)
}

/// Errors against a sweep parameter, rows sorted by descending parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub name: String,
    pub param: String,
    pub columns: Vec<String>,
    pub rows: Vec<(f64, Vec<f64>)>,
    pub meta: Vec<(String, String)>,
}

impl ErrorTable {
    pub fn new(name: &str, param: &str, columns: &[&str]) -> Self {
        ErrorTable {
            name: name.to_string(),
            param: param.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, param: f64, errors: Vec<f64>) {
        debug_assert_eq!(errors.len(), self.columns.len());
        self.rows.push((param, errors));
        self.rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    }

    pub fn column(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|(p, e)| (*p, e[c])).collect())
    }

    pub fn slope(&self, name: &str) -> Result<f64> {
        fit_slope(&self.column(name).ok_or_else(|| Error::Parameter(format!("no column {name}")))?)
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut header = vec![self.param.clone()];
        header.extend(self.columns.iter().cloned());
        let mut t = CsvTable::new(&header);
        t.meta("experiment", &self.name);
        for (k, v) in &self.meta {
            t.meta(k, v);
        }
        for (p, errs) in &self.rows {
            let mut cells = vec![num(*p)];
            cells.extend(errs.iter().map(|e| num(*e)));
            t.row(cells);
        }
        for c in &self.columns {
            let line = match self.slope(c) {
                Ok(s) => format!("slope {c} = {}", num(s)),
                Err(_) => format!("slope {c} = nan"),
            };
            t.footer.push(line);
        }
        t
    }
}

/// Single-spin run parameters in experiment units: `tau = tau_ratio eps`,
/// `micro_dt = eps / micro_per_eps`, `macro_dt = t_end / macro_steps`.
#[derive(Debug, Clone)]
pub struct SingleParams {
    pub eps: f64,
    pub tau_ratio: f64,
    pub t_end: f64,
    pub macro_steps: usize,
    pub kernel: (u32, i32),
    pub beta: f64,
    pub gamma: f64,
    pub field: FieldSpec,
    pub m0: Vec3,
    pub micro_per_eps: f64,
}

impl SingleParams {
    /// Full-solution setup: `eps = 0.01`, `tau = 5 eps`, `T = 2 pi` in 20
    /// macro steps, kernel (5, 4), `beta = 1`, `m0 = (1, 0, 0)`.
    pub fn full_solution(field: NamedField, gamma: f64) -> Self {
        SingleParams {
            eps: 0.01,
            tau_ratio: 5.0,
            t_end: 2.0 * PI,
            macro_steps: 20,
            kernel: (5, 4),
            beta: 1.0,
            gamma,
            field: field.into(),
            m0: Vec3::E_X,
            micro_per_eps: 100.0,
        }
    }

    /// Amplitude setup: `tau = 5.3 eps`, kernel (1, 7), `T = 1` in 10 steps,
    /// `m0 = (1, 1, 1) / sqrt 3`, circular field, `beta = gamma = 1`.
    pub fn amplitude(eps: f64) -> Self {
        SingleParams {
            eps,
            tau_ratio: 5.3,
            t_end: 1.0,
            macro_steps: 10,
            kernel: (1, 7),
            beta: 1.0,
            gamma: 1.0,
            field: NamedField::Circular.into(),
            m0: Vec3::new(1.0, 1.0, 1.0) / 3f64.sqrt(),
            micro_per_eps: 100.0,
        }
    }

    /// As [`SingleParams::amplitude`] without damping.
    pub fn hmm_error(eps: f64) -> Self {
        SingleParams { gamma: 0.0, ..SingleParams::amplitude(eps) }
    }

    pub fn tau(&self) -> f64 {
        self.tau_ratio * self.eps
    }

    pub fn macro_dt(&self) -> f64 {
        self.t_end / self.macro_steps as f64
    }

    pub fn hmm_config(&self) -> Result<HmmConfig> {
        let kernel = KernelSpec::build(self.kernel.0, self.kernel.1)?;
        let mut c = HmmConfig::new(
            self.eps,
            self.tau(),
            self.macro_dt(),
            self.t_end,
            kernel,
            self.field.clone(),
            self.m0,
        );
        c.micro_dt = self.eps / self.micro_per_eps;
        c.beta = self.beta;
        c.gamma = self.gamma;
        c.validate()?;
        Ok(c)
    }

    pub fn describe(&self, t: &mut CsvTable) {
        t.meta("eps", num(self.eps))
            .meta("tau", num(self.tau()))
            .meta("macro_dt", num(self.macro_dt()))
            .meta("micro_dt", num(self.eps / self.micro_per_eps))
            .meta("T", num(self.t_end))
            .meta("kernel_p", self.kernel.0)
            .meta("kernel_q", self.kernel.1)
            .meta("beta", num(self.beta))
            .meta("gamma", num(self.gamma))
            .meta("field", self.field.name())
            .meta("m0", format!("{} {} {}", num(self.m0.x), num(self.m0.y), num(self.m0.z)));
    }
}

fn sweep<T: Send, F>(values: &[f64], f: F) -> Result<Vec<T>>
where
    F: Fn(f64) -> Result<T> + Sync + Send,
{
    values.par_iter().map(|&v| f(v)).collect()
}

/// Tail-expansion experiment on the scaled micro problem.
#[derive(Debug, Clone)]
pub struct TailParams {
    pub eps_list: Vec<f64>,
    /// Step of the scaled problem on `[0, 1]`.
    pub dt: f64,
    pub t_a: f64,
    pub r_frac: f64,
    pub m: Vec3,
    pub beta: f64,
    pub field: FieldSpec,
}

impl Default for TailParams {
    fn default() -> Self {
        TailParams {
            eps_list: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
            dt: 1e-3,
            t_a: 0.0,
            r_frac: 0.0,
            m: Vec3::E_Z,
            beta: 1.0,
            field: NamedField::Circular.into(),
        }
    }
}

/// Columns `err_m0 = max_t |m - M|` and `err_m1 = max_t |m - (M + eps m1)|`.
pub fn exp_tail(p: &TailParams) -> Result<ErrorTable> {
    let samples = (1.0 / p.dt).round() as usize;
    let m1 = m1_series(samples, p.t_a, p.r_frac, p.m, p.beta, &p.field);
    let mp = MidpointConfig::default();
    let rows = sweep(&p.eps_list, |eps| {
        let traj = scaled_micro(p.t_a, p.r_frac, p.m, eps, p.beta, &p.field, p.dt, &mp)?;
        let mut e0: f64 = 0.0;
        let mut e1: f64 = 0.0;
        for (m, m1) in traj.states.iter().zip(&m1) {
            e0 = e0.max((*m - p.m).norm());
            e1 = e1.max((*m - (p.m + *m1 * eps)).norm());
        }
        Ok((eps, vec![e0, e1]))
    })?;
    let mut t = ErrorTable::new("tail", "eps", &["err_m0", "err_m1"]);
    for (eps, e) in rows {
        t.push(eps, e);
    }
    t.meta = vec![
        ("field".into(), p.field.name().into()),
        ("dt".into(), num(p.dt)),
        ("t_a".into(), num(p.t_a)),
        ("r".into(), num(p.r_frac)),
        ("M".into(), format!("{} {} {}", num(p.m.x), num(p.m.y), num(p.m.z))),
        ("beta".into(), num(p.beta)),
    ];
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowMode {
    /// `tau = ratio eps`.
    Tied { ratio: f64 },
    /// Fixed `tau`.
    Fixed { tau: f64 },
}

impl WindowMode {
    pub fn tau(&self, eps: f64) -> f64 {
        match *self {
            WindowMode::Tied { ratio } => ratio * eps,
            WindowMode::Fixed { tau } => tau,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UpscalingParams {
    pub eps_list: Vec<f64>,
    pub mode: WindowMode,
    pub qs: Vec<i32>,
    pub p: u32,
    pub field: FieldSpec,
    pub m: Vec3,
    pub t_a: f64,
    pub beta: f64,
    pub micro_per_eps: f64,
}

impl UpscalingParams {
    pub fn new(mode: WindowMode, field: NamedField) -> Self {
        UpscalingParams {
            eps_list: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
            mode,
            qs: vec![-1, 0, 2, 4, 7],
            p: 1,
            field: field.into(),
            m: Vec3::E_Z,
            t_a: 0.0,
            beta: 1.0,
            micro_per_eps: 100.0,
        }
    }
}

/// `C (tau + (eps / tau)^(q + 2)) |M|` with `C = 10`.
pub fn upscaling_bound(eps: f64, tau: f64, q: i32, m_norm: f64) -> f64 {
    10.0 * (tau + (eps / tau).powi(q + 2)) * m_norm
}

/// Column name for kernel smoothness `q` in upscaling tables.
pub fn q_column(q: i32) -> String {
    format!("q={q}")
}

/// Upscaling error `|F + M x Hbar|`, one column per kernel smoothness.
pub fn exp_upscaling(p: &UpscalingParams) -> Result<ErrorTable> {
    let kernels: Vec<KernelSpec> = p.qs.iter().map(|&q| KernelSpec::build(p.p, q)).collect::<Result<_>>()?;
    let rows = sweep(&p.eps_list, |eps| {
        let tau = p.mode.tau(eps);
        let exact = -cross(p.m, p.field.effective(p.t_a)) * p.beta;
        let errs = kernels
            .iter()
            .map(|k| {
                let mut c = HmmConfig::new(eps, tau, 2.0 * tau, 2.0 * tau, k.clone(), p.field.clone(), p.m);
                c.micro_dt = eps / p.micro_per_eps;
                c.beta = p.beta;
                hmm::micro_half_steps(tau, c.micro_dt)?;
                Ok((hmm::flux(p.t_a, p.m, &c)? - exact).norm())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((eps, errs))
    })?;
    let cols: Vec<String> = p.qs.iter().map(|&q| q_column(q)).collect();
    let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    let mut t = ErrorTable::new("upscaling", "eps", &col_refs);
    for (eps, e) in rows {
        t.push(eps, e);
    }
    let mode = match p.mode {
        WindowMode::Tied { ratio } => format!("tied tau/eps = {}", num(ratio)),
        WindowMode::Fixed { tau } => format!("fixed tau = {}", num(tau)),
    };
    t.meta = vec![
        ("mode".into(), mode),
        ("kernel_p".into(), p.p.to_string()),
        ("field".into(), p.field.name().into()),
        ("M".into(), format!("{} {} {}", num(p.m.x), num(p.m.y), num(p.m.z))),
        ("t_a".into(), num(p.t_a)),
        ("beta".into(), num(p.beta)),
        ("micro_dt".into(), format!("eps/{}", p.micro_per_eps)),
    ];
    Ok(t)
}

/// HMM, direct simulation and averaged solution on the macro grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSolution {
    pub times: Vec<f64>,
    pub hmm: MacroTrajectory,
    pub dns: Vec<Vec3>,
    pub effective: Vec<Vec3>,
}

impl FullSolution {
    pub fn max_deviation_from_effective(&self) -> f64 {
        self.hmm.states.iter().zip(&self.effective).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self, p: &SingleParams) -> CsvTable {
        let mut t = CsvTable::new(&[
            "time", "hmm_x", "hmm_y", "hmm_z", "dns_x", "dns_y", "dns_z", "eff_x", "eff_y", "eff_z",
        ]);
        t.meta("experiment", "full_solution");
        p.describe(&mut t);
        t.meta("oracle_dt", num(p.macro_dt() / 100.0));
        t.meta("dns_dt", num(dns_step_for(p.macro_dt(), p.eps)));
        for k in 0..self.times.len() {
            let mut cells = vec![num(self.times[k])];
            cells.extend(vec_cells(self.hmm.states[k]));
            cells.extend(vec_cells(self.dns[k]));
            cells.extend(vec_cells(self.effective[k]));
            t.row(cells);
        }
        t
    }
}

/// Runs the HMM, a direct simulation sampled at macro times, and the
/// averaged equation at step `macro_dt / 100`.
pub fn exp_full_solution(p: &SingleParams) -> Result<FullSolution> {
    let cfg = p.hmm_config()?;
    let hmm_traj = hmm::run(&cfg)?;
    let dt_macro = p.macro_dt();
    let dns_dt = dns_step_for(dt_macro, p.eps);
    let stride = (dt_macro / dns_dt).round() as usize;
    let mut dcfg = DnsConfig::new(p.eps, p.t_end, p.field.clone(), p.m0);
    dcfg.dt = dns_dt;
    dcfg.beta = p.beta;
    dcfg.gamma = p.gamma;
    let dns = dns_single_strided(&dcfg, stride)?;
    let eff = effective_solve(&p.field, p.beta, p.gamma, p.m0, p.t_end, dt_macro / 100.0, &cfg.midpoint)?;
    let effective: Vec<Vec3> = eff.states.iter().step_by(100).copied().collect();
    Ok(FullSolution { times: hmm_traj.times.clone(), hmm: hmm_traj, dns: dns.states, effective })
}

/// `max_n ||M_n| - |M_0||` of an HMM run.
pub fn amplitude_deviation(traj: &MacroTrajectory) -> f64 {
    let base = traj.states[0].norm();
    traj.states.iter().map(|m| (m.norm() - base).abs()).fold(0.0, f64::max)
}

/// Amplitude drift against `eps`, column `max_dev`.
pub fn exp_amplitude(eps_list: &[f64], make: impl Fn(f64) -> SingleParams + Sync + Send) -> Result<ErrorTable> {
    let rows = sweep(eps_list, |eps| {
        let traj = hmm::run(&make(eps).hmm_config()?)?;
        Ok((eps, vec![amplitude_deviation(&traj)]))
    })?;
    let mut t = ErrorTable::new("amplitude", "eps", &["max_dev"]);
    for (eps, e) in rows {
        t.push(eps, e);
    }
    describe_sweep(&mut t, &make(eps_list[0]));
    Ok(t)
}

/// Per-step amplitude trace `|M_n|`.
pub fn amplitude_trace(p: &SingleParams) -> Result<(MacroTrajectory, CsvTable)> {
    let traj = hmm::run(&p.hmm_config()?)?;
    let mut t = CsvTable::new(&["time", "amplitude"]);
    t.meta("experiment", "amplitude_trace");
    p.describe(&mut t);
    for (time, m) in traj.times.iter().zip(&traj.states) {
        t.row(vec![num(*time), num(m.norm())]);
    }
    Ok((traj, t))
}

fn describe_sweep(t: &mut ErrorTable, p: &SingleParams) {
    let mut scratch = CsvTable::default();
    p.describe(&mut scratch);
    t.meta = scratch
        .meta
        .into_iter()
        .filter(|(k, _)| k != "eps" && k != "tau" && k != "micro_dt")
        .collect();
    t.meta.push(("tau".into(), format!("{} eps", num(p.tau_ratio))));
    t.meta.push(("micro_dt".into(), format!("eps/{}", p.micro_per_eps)));
}

/// `max_n |M_n - mbar_n|` against the averaged equation discretized with the
/// same macro step, column `err`.
pub fn exp_hmm_error(eps_list: &[f64], make: impl Fn(f64) -> SingleParams + Sync + Send) -> Result<ErrorTable> {
    let rows = sweep(eps_list, |eps| {
        let p = make(eps);
        let cfg = p.hmm_config()?;
        let traj = hmm::run(&cfg)?;
        let disc = effective_solve(&p.field, p.beta, p.gamma, p.m0, p.t_end, p.macro_dt(), &cfg.midpoint)?;
        let err = traj.states.iter().zip(&disc.states).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max);
        Ok((eps, vec![err]))
    })?;
    let mut t = ErrorTable::new("hmm_error", "eps", &["err"]);
    for (eps, e) in rows {
        t.push(eps, e);
    }
    describe_sweep(&mut t, &make(eps_list[0]));
    Ok(t)
}

/// Right-hand side counts of the HMM and of a direct simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    pub eps: f64,
    pub hmm_evaluations: usize,
    pub hmm_iters: usize,
    pub dns_evaluations: usize,
}

impl Efficiency {
    pub fn ratio(&self) -> f64 {
        self.dns_evaluations as f64 / self.hmm_evaluations as f64
    }
}

/// Counts one evaluation per micro sample for the HMM and one per step for
/// a direct simulation at `dt = eps / 20` over the same interval.
pub fn exp_efficiency(p: &SingleParams) -> Result<Efficiency> {
    let traj = hmm::run(&p.hmm_config()?)?;
    let dns_dt = dns_step_for(p.macro_dt(), p.eps);
    let dns_steps = (p.t_end / dns_dt).round() as usize;
    Ok(Efficiency {
        eps: p.eps,
        hmm_evaluations: traj.micro_samples,
        hmm_iters: traj.total_iters(),
        dns_evaluations: dns_steps,
    })
}

/// HMM macro values and direct-simulation data at selected macro steps.
#[derive(Debug, Clone)]
pub struct ChainComparison {
    pub run: ChainRun,
    pub snapshots: Vec<ChainSnapshot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSnapshot {
    pub step: usize,
    pub time: f64,
    pub hmm: Vec<Vec3>,
    /// Kernel averages of the direct simulation at the macro points.
    pub dns_macro: Vec<Vec3>,
    pub dns_spins: Vec<Vec3>,
}

impl ChainSnapshot {
    pub fn max_difference(&self) -> f64 {
        self.hmm.iter().zip(&self.dns_macro).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max)
    }
}

/// Runs the chain HMM and a direct simulation up to `T + tau / 2`, and
/// compares them at the macro steps in `snapshot_steps`. Snapshot 0 uses
/// the spatial average only.
pub fn exp_chain(cfg: &ChainConfig, snapshot_steps: &[usize]) -> Result<ChainComparison> {
    let run = chain_run(cfg)?;
    let dns_dt = dns_step_for(cfg.tau / 2.0, cfg.eps);
    let dns = dns_chain(cfg, dns_dt, cfg.t_end + cfg.tau / 2.0, 1)?;
    let mut snapshots = Vec::new();
    for &step in snapshot_steps {
        let hmm = run.states.get(step).ok_or_else(|| {
            Error::Parameter(format!("snapshot step {step} beyond {} macro steps", run.states.len() - 1))
        })?;
        let time = run.times[step];
        let k = (time / dns_dt).round() as usize;
        let dns_macro = (0..cfg.l)
            .map(|cell| {
                if step == 0 {
                    Ok(macro_average_spatial(&dns.states[0], cell, cfg))
                } else {
                    macro_average(&dns, cell, time, cfg)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        snapshots.push(ChainSnapshot {
            step,
            time,
            hmm: hmm.values.clone(),
            dns_macro,
            dns_spins: dns.states[k].clone(),
        });
    }
    Ok(ChainComparison { run, snapshots })
}

/// Shared metadata for chain CSVs.
pub fn describe_chain(cfg: &ChainConfig, t: &mut CsvTable) {
    t.meta("N", cfg.n)
        .meta("L", cfg.l)
        .meta("r", cfg.r)
        .meta("ell", cfg.ell)
        .meta("dx", num(cfg.dx))
        .meta("eta", num(cfg.eta()))
        .meta("J", num(cfg.j_exchange))
        .meta("eps", num(cfg.eps))
        .meta("tau", num(cfg.tau))
        .meta("macro_dt", num(cfg.macro_dt))
        .meta("micro_dt", num(cfg.micro_dt))
        .meta("beta", num(cfg.beta))
        .meta("gamma", num(cfg.gamma))
        .meta("T", num(cfg.t_end))
        .meta("kernel_time", format!("{} {}", cfg.kernel_time.p(), cfg.kernel_time.q()))
        .meta("kernel_space", format!("{} {}", cfg.kernel_space.p(), cfg.kernel_space.q()))
        .meta("field", cfg.field.name())
        .meta("initial", cfg.initial.name());
}

/// Macro values `I,X,Mx,My,Mz` for one snapshot.
pub fn chain_macro_csv(cfg: &ChainConfig, time: f64, values: &[Vec3]) -> CsvTable {
    let mut t = CsvTable::new(&["I", "X", "Mx", "My", "Mz"]);
    describe_chain(cfg, &mut t);
    t.meta("time", num(time));
    for (i, v) in values.iter().enumerate() {
        let mut cells = vec![i.to_string(), num(cfg.macro_x(i))];
        cells.extend(vec_cells(*v));
        t.row(cells);
    }
    t
}

/// Spins `i,x,mx,my,mz` for one snapshot.
pub fn chain_spins_csv(cfg: &ChainConfig, time: f64, spins: &[Vec3]) -> CsvTable {
    let mut t = CsvTable::new(&["i", "x", "mx", "my", "mz"]);
    describe_chain(cfg, &mut t);
    t.meta("time", num(time));
    for (i, v) in spins.iter().enumerate() {
        let mut cells = vec![i.to_string(), num(cfg.site_x(i))];
        cells.extend(vec_cells(*v));
        t.row(cells);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_laws() {
        assert!((fit_slope(&[(0.1, 0.01), (0.01, 0.001)]).unwrap() - 1.0).abs() < 1e-12);
        assert!((fit_slope(&[(0.1, 1e-2), (0.01, 1e-4)]).unwrap() - 2.0).abs() < 1e-12);
        let pts: Vec<(f64, f64)> = [0.5, 0.2, 0.1, 0.03, 0.007]
            .iter()
            .map(|&x: &f64| (x, 3.0 * x.powf(1.5)))
            .collect();
        assert!((fit_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn slope_rejects_bad_data() {
        assert_eq!(fit_slope(&[(0.1, 0.01)]), Err(Error::NonPositiveData));
        assert_eq!(fit_slope(&[(0.1, 0.01), (0.2, 0.0)]), Err(Error::NonPositiveData));
        assert_eq!(fit_slope(&[(-0.1, 0.01), (0.2, 0.1)]), Err(Error::NonPositiveData));
    }

    #[test]
    fn table_rows_sorted_descending() {
        let mut t = ErrorTable::new("x", "eps", &["e"]);
        t.push(0.01, vec![1e-4]);
        t.push(0.1, vec![1e-2]);
        t.push(0.03, vec![9e-4]);
        let params: Vec<f64> = t.rows.iter().map(|r| r.0).collect();
        assert_eq!(params, vec![0.1, 0.03, 0.01]);
        assert!((t.slope("e").unwrap() - 2.0).abs() < 1e-12);
        let csv = t.to_csv().render();
        assert!(csv.starts_with("# experiment = x\neps,e\n"));
        assert!(csv.ends_with("# slope e = 2.0000000000000000e0\n"));
    }

    #[test]
    fn tail_errors_positive_and_decreasing() {
        let p = TailParams { eps_list: vec![1e-1, 1e-2], ..TailParams::default() };
        let t = exp_tail(&p).unwrap();
        for c in ["err_m0", "err_m1"] {
            let col = t.column(c).unwrap();
            assert!(col.iter().all(|&(_, e)| e > 0.0));
            assert!(col[1].1 < col[0].1);
        }
    }

    #[test]
    fn experiments_are_deterministic() {
        let p = UpscalingParams { eps_list: vec![1e-2, 5e-3], ..UpscalingParams::new(WindowMode::Tied { ratio: 5.3 }, NamedField::Circular) };
        let a = exp_upscaling(&p).unwrap().to_csv().render();
        let b = exp_upscaling(&p).unwrap().to_csv().render();
        assert_eq!(a, b);
    }
}
