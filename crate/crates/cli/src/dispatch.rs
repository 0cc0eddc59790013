//! Command-line definitions and subcommand execution.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use llhmm::experiments::{
    amplitude_trace, chain_macro_csv, chain_spins_csv, exp_amplitude, exp_chain, exp_full_solution, exp_hmm_error,
    exp_tail, exp_upscaling, SingleParams, TailParams, UpscalingParams, WindowMode,
};
use llhmm::output::{num, vec_cells, CsvTable};
use llhmm::reference::{dns_chain, dns_single, effective_solve};
use llhmm::{hmm, HmmConfig, NamedField, Vec3};

use crate::config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "llhmm", version, about = "Multiscale solvers for Landau-Lifschitz spin dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a kernel and its moments.
    KernelCheck(Common),
    /// Single-spin solvers.
    #[command(subcommand)]
    Single(SingleCmd),
    /// Spin-chain solvers.
    #[command(subcommand)]
    Chain(ChainCmd),
    /// Convergence experiments.
    #[command(subcommand)]
    Convergence(ConvergenceCmd),
}

#[derive(Debug, Subcommand)]
pub enum SingleCmd {
    /// HMM trajectory.
    Run(Common),
    /// Direct simulation of the oscillatory problem.
    Dns(Common),
    /// Solution of the averaged equation.
    Effective(Common),
}

#[derive(Debug, Subcommand)]
pub enum ChainCmd {
    /// Chain HMM with direct-simulation comparison files.
    Run(ChainArgs),
    /// Direct simulation of the chain only.
    Dns(ChainArgs),
}

#[derive(Debug, Subcommand)]
pub enum ConvergenceCmd {
    /// Micro solution against its tail expansion.
    Tail(Common),
    /// Upscaled flux against the averaged flux.
    Upscaling(UpscalingArgs),
    /// Magnetization amplitude drift.
    Amplitude(AmplitudeArgs),
    /// HMM, direct simulation and averaged solution together.
    Full(Common),
}

/// Flags shared by every subcommand. Each mirrors a config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Window length in units of eps, used when --tau is absent.
    #[arg(long = "tau-ratio")]
    pub tau_ratio: Option<f64>,
    #[arg(long = "macro-dt")]
    pub macro_dt: Option<f64>,
    #[arg(long = "micro-dt")]
    pub micro_dt: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long = "kernel-p")]
    pub kernel_p: Option<u32>,
    #[arg(long = "kernel-q", allow_hyphen_values = true)]
    pub kernel_q: Option<i32>,
    /// constant | circular | circular_cos | squared | chain_pulse
    #[arg(long)]
    pub field: Option<String>,
    /// Initial magnetization, e.g. "1,0,0".
    #[arg(long, allow_hyphen_values = true)]
    pub m0: Option<String>,
    /// Sweep values of eps, e.g. "1e-2,5e-3".
    #[arg(long = "eps-list")]
    pub eps_list: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<f64>,
    /// Macro steps at which snapshots are written.
    #[arg(long, value_delimiter = ',', default_value = "0,5,10,20")]
    pub snapshots: Vec<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct UpscalingArgs {
    #[command(flatten)]
    pub common: Common,
    /// Kernel smoothness values, one column each.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0,2,4,7")]
    pub qs: Vec<i32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    /// max_n ||M_n| - |M_0|| against eps.
    #[default]
    Drift,
    /// max_n |M_n - mbar_n| against eps, undamped.
    Error,
    /// |M_n| over one run.
    Trace,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AmplitudeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Measure::Drift)]
    pub measure: Measure,
}

impl Common {
    /// Config file contents overridden by the flags that are present.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        let flags: [(&str, Option<String>); 15] = [
            ("eps", self.eps.map(|v| v.to_string())),
            ("tau", self.tau.map(|v| v.to_string())),
            ("tau_ratio", self.tau_ratio.map(|v| v.to_string())),
            ("macro_dt", self.macro_dt.map(|v| v.to_string())),
            ("micro_dt", self.micro_dt.map(|v| v.to_string())),
            ("beta", self.beta.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("T", self.t_end.map(|v| v.to_string())),
            ("kernel_p", self.kernel_p.map(|v| v.to_string())),
            ("kernel_q", self.kernel_q.map(|v| v.to_string())),
            ("field", self.field.clone()),
            ("m0", self.m0.clone()),
            ("eps_list", self.eps_list.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("threads", self.threads.map(|v| v.to_string())),
        ];
        apply(&mut cfg, &flags)?;
        Ok(cfg)
    }
}

impl ChainArgs {
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = self.common.run_config()?;
        let flags: [(&str, Option<String>); 6] = [
            ("N", self.n.map(|v| v.to_string())),
            ("L", self.l.map(|v| v.to_string())),
            ("r", self.r.map(|v| v.to_string())),
            ("ell", self.ell.map(|v| v.to_string())),
            ("dx", self.dx.map(|v| v.to_string())),
            ("J", self.j.map(|v| v.to_string())),
        ];
        apply(&mut cfg, &flags)?;
        Ok(cfg)
    }
}

fn apply(cfg: &mut RunConfig, flags: &[(&str, Option<String>)]) -> Result<()> {
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v).map_err(ConfigError::Validation)?;
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::KernelCheck(a) => kernel_check(&setup(a.run_config()?)?),
        Command::Single(SingleCmd::Run(a)) => single_run(&setup(a.run_config()?)?),
        Command::Single(SingleCmd::Dns(a)) => single_dns(&setup(a.run_config()?)?),
        Command::Single(SingleCmd::Effective(a)) => single_effective(&setup(a.run_config()?)?),
        Command::Chain(ChainCmd::Run(a)) => chain_run(&setup(a.run_config()?)?, &a.snapshots),
        Command::Chain(ChainCmd::Dns(a)) => chain_dns(&setup(a.run_config()?)?, &a.snapshots),
        Command::Convergence(ConvergenceCmd::Tail(a)) => tail(&setup(a.run_config()?)?),
        Command::Convergence(ConvergenceCmd::Upscaling(a)) => upscaling(&setup(a.common.run_config()?)?, &a.qs),
        Command::Convergence(ConvergenceCmd::Amplitude(a)) => amplitude(&setup(a.common.run_config()?)?, a.measure),
        Command::Convergence(ConvergenceCmd::Full(a)) => full(&setup(a.run_config()?)?),
    }
}

fn setup(cfg: RunConfig) -> Result<RunConfig> {
    if let Some(n) = cfg.threads() {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(cfg)
}

fn write(table: &CsvTable, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    table.write(path).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn vec_text(v: Vec3) -> String {
    format!("{} {} {}", num(v.x), num(v.y), num(v.z))
}

fn describe_hmm(c: &HmmConfig, t: &mut CsvTable) {
    t.meta("eps", num(c.eps))
        .meta("tau", num(c.tau))
        .meta("macro_dt", num(c.macro_dt))
        .meta("micro_dt", num(c.micro_dt))
        .meta("T", num(c.t_end))
        .meta("kernel_p", c.kernel.p())
        .meta("kernel_q", c.kernel.q())
        .meta("beta", num(c.beta))
        .meta("gamma", num(c.gamma))
        .meta("field", c.field.name())
        .meta("m0", vec_text(c.m0));
}

fn headed(command: &str, header: &[&str]) -> CsvTable {
    let mut t = CsvTable::new(header);
    t.meta("command", command);
    t
}

/// Prefixes the command name to a table built by the library.
fn with_command(command: &str, mut t: CsvTable) -> CsvTable {
    t.meta.insert(0, ("command".into(), command.into()));
    t
}

fn kernel_check(cfg: &RunConfig) -> Result<()> {
    let k = cfg.kernel_or(1, 0)?;
    let mut t = headed("kernel-check", &["t", "K"]);
    t.meta("kernel_p", k.p()).meta("kernel_q", k.q());
    let coeffs: Vec<String> = k.coeffs().iter().map(|c| num(*c)).collect();
    t.meta("coeffs", coeffs.join(" "));
    for r in 0..=k.p() {
        t.meta(&format!("moment_{r}"), num(k.moment(r)));
    }
    let n = 200;
    for i in 0..=n {
        let s = -0.5 + i as f64 / n as f64;
        t.row(vec![num(s), num(k.eval(s))]);
    }
    write(&t, &cfg.out_or("kernel.csv"))
}

fn single_run(cfg: &RunConfig) -> Result<()> {
    let c = cfg.hmm()?;
    let traj = hmm::run(&c)?;
    let mut t = headed("single run", &["time", "Mx", "My", "Mz", "flux_x", "flux_y", "flux_z", "iters"]);
    describe_hmm(&c, &mut t);
    t.meta("flux", "flux of the macro step ending at this row");
    for (n, (time, m)) in traj.times.iter().zip(&traj.states).enumerate() {
        let (f, iters) = if n == 0 { (Vec3::ZERO, 0) } else { (traj.fluxes[n - 1], traj.iters[n - 1]) };
        let mut cells = vec![num(*time)];
        cells.extend(vec_cells(*m));
        cells.extend(vec_cells(f));
        cells.push(iters.to_string());
        t.row(cells);
    }
    t.footer.push(format!("micro_samples = {}", traj.micro_samples));
    write(&t, &cfg.out_or("single_run.csv"))
}

fn trajectory_table(command: &str, times: &[f64], states: &[Vec3]) -> CsvTable {
    let mut t = headed(command, &["time", "mx", "my", "mz"]);
    for (time, m) in times.iter().zip(states) {
        let mut cells = vec![num(*time)];
        cells.extend(vec_cells(*m));
        t.rows.push(cells);
    }
    t
}

fn single_dns(cfg: &RunConfig) -> Result<()> {
    let c = cfg.dns()?;
    let traj = dns_single(&c)?;
    let mut t = trajectory_table("single dns", &traj.times, &traj.states);
    t.meta("eps", num(c.eps))
        .meta("dt", num(c.dt))
        .meta("T", num(c.t_end))
        .meta("beta", num(c.beta))
        .meta("gamma", num(c.gamma))
        .meta("field", c.field.name())
        .meta("m0", vec_text(c.m0));
    write(&t, &cfg.out_or("single_dns.csv"))
}

fn single_effective(cfg: &RunConfig) -> Result<()> {
    let c = cfg.hmm()?;
    let dt = c.macro_dt / 100.0;
    let traj = effective_solve(&c.field, c.beta, c.gamma, c.m0, c.t_end, dt, &c.midpoint)?;
    let mut t = trajectory_table("single effective", &traj.times, &traj.states);
    t.meta("dt", num(dt))
        .meta("T", num(c.t_end))
        .meta("beta", num(c.beta))
        .meta("gamma", num(c.gamma))
        .meta("field", c.field.name())
        .meta("m0", vec_text(c.m0));
    write(&t, &cfg.out_or("single_effective.csv"))
}

fn chain_run(cfg: &RunConfig, snapshots: &[usize]) -> Result<()> {
    let c = cfg.chain()?;
    let cmp = exp_chain(&c, snapshots)?;
    let dir = cfg.out_or("chain_run");
    for s in &cmp.snapshots {
        write(&with_command("chain run", chain_macro_csv(&c, s.time, &s.hmm)), &dir.join(format!("hmm_n{}.csv", s.step)))?;
        write(
            &with_command("chain run", chain_macro_csv(&c, s.time, &s.dns_macro)),
            &dir.join(format!("dns_avg_n{}.csv", s.step)),
        )?;
        write(&with_command("chain run", chain_spins_csv(&c, s.time, &s.dns_spins)), &dir.join(format!("dns_n{}.csv", s.step)))?;
        println!("step {} time {}: max |M_I - averaged DNS| = {:.3e}", s.step, s.time, s.max_difference());
    }
    Ok(())
}

fn chain_dns(cfg: &RunConfig, snapshots: &[usize]) -> Result<()> {
    let c = cfg.chain()?;
    let steps = (c.t_end / c.macro_dt).round() as usize;
    if let Some(bad) = snapshots.iter().find(|&&s| s > steps) {
        return Err(ConfigError::Validation(format!("snapshot step {bad} beyond {steps} macro steps")).into());
    }
    let dt = llhmm::reference::dns_step_for(c.macro_dt, c.eps);
    let stride = (c.macro_dt / dt).round() as usize;
    let traj = dns_chain(&c, dt, c.t_end, stride)?;
    let dir = cfg.out_or("chain_dns");
    for &s in snapshots {
        let t = chain_spins_csv(&c, traj.times[s], &traj.states[s]);
        write(&with_command("chain dns", t), &dir.join(format!("dns_n{s}.csv")))?;
    }
    Ok(())
}

fn tail(cfg: &RunConfig) -> Result<()> {
    let d = TailParams::default();
    let p = TailParams {
        eps_list: cfg.eps_list_or(&d.eps_list),
        m: cfg.m0_or(d.m),
        field: cfg.field_or(NamedField::Circular),
        ..d
    };
    let table = exp_tail(&p)?;
    write(&with_command("convergence tail", table.to_csv()), &cfg.out_or("tail.csv"))
}

fn upscaling(cfg: &RunConfig, qs: &[i32]) -> Result<()> {
    let mode = match cfg.get("tau") {
        Some(v) => WindowMode::Fixed { tau: v.parse()? },
        None => WindowMode::Tied { ratio: cfg.get("tau_ratio").map_or(Ok(5.3), str::parse)? },
    };
    let mut p = UpscalingParams::new(mode, NamedField::CircularCos);
    p.eps_list = cfg.eps_list_or(&p.eps_list);
    p.qs = qs.to_vec();
    p.p = cfg.get("kernel_p").map_or(Ok(p.p), str::parse)?;
    p.field = cfg.field_or(NamedField::CircularCos);
    p.m = cfg.m0_or(p.m);
    if let Some(v) = cfg.get("beta") {
        p.beta = v.parse()?;
    }
    let table = exp_upscaling(&p)?.to_csv();
    write(&with_command("convergence upscaling", table), &cfg.out_or("upscaling.csv"))
}

const AMPLITUDE_EPS: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

fn amplitude(cfg: &RunConfig, measure: Measure) -> Result<()> {
    let command = "convergence amplitude";
    match measure {
        Measure::Trace => {
            let p = cfg.single_params(SingleParams { t_end: 2.0 * std::f64::consts::PI, macro_steps: 20, ..SingleParams::amplitude(0.01) })?;
            let (_, t) = amplitude_trace(&p)?;
            write(&with_command(command, t), &cfg.out_or("amplitude_trace.csv"))
        }
        Measure::Drift | Measure::Error => {
            let eps_list = cfg.eps_list_or(&AMPLITUDE_EPS);
            for &eps in &eps_list {
                params_at(cfg, eps, measure)?;
            }
            let make = |eps: f64| params_at(cfg, eps, measure).expect("validated above");
            let table = if measure == Measure::Drift {
                exp_amplitude(&eps_list, make)?
            } else {
                exp_hmm_error(&eps_list, make)?
            };
            let name = if measure == Measure::Drift { "amplitude.csv" } else { "hmm_error.csv" };
            write(&with_command(command, table.to_csv()), &cfg.out_or(name))
        }
    }
}

/// Sweep parameters at one `eps`. The sweep variable and its tied scales
/// replace `eps`, `tau` and `micro_dt` from the config.
fn params_at(cfg: &RunConfig, eps: f64, measure: Measure) -> Result<SingleParams, ConfigError> {
    let base = if measure == Measure::Error { SingleParams::hmm_error(eps) } else { SingleParams::amplitude(eps) };
    let mut sweep = cfg.clone();
    sweep.set("eps", &eps.to_string()).map_err(ConfigError::Validation)?;
    for key in ["tau", "micro_dt"] {
        if sweep.get(key).is_some() {
            return Err(ConfigError::Validation(format!("`{key}` is tied to eps in sweeps; use tau_ratio")));
        }
    }
    sweep.single_params(base)
}

fn full(cfg: &RunConfig) -> Result<()> {
    let p = cfg.single_params(SingleParams::full_solution(NamedField::Circular, 1.0))?;
    let sol = exp_full_solution(&p)?;
    println!("max |M_n - mbar(t_n)| = {:.3e}", sol.max_deviation_from_effective());
    write(&with_command("convergence full", sol.to_csv(&p)), &cfg.out_or("full.csv"))
}
