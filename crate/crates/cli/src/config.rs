//! Flat `key = value` configuration with `#` comments, merged with flag
//! overrides and turned into validated solver configurations.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use llhmm::experiments::SingleParams;
use llhmm::quadrature::commensurate_steps;
use llhmm::reference::{dns_step_for, DnsConfig};
use llhmm::{ChainConfig, FieldSpec, HmmConfig, KernelSpec, NamedField, Vec3};

/// Every accepted key, in the order they are echoed into CSV metadata.
pub const KEYS: &[&str] = &[
    "eps", "tau", "tau_ratio", "macro_dt", "micro_dt", "beta", "gamma", "T", "kernel_p", "kernel_q", "field",
    "m0", "eps_list", "out", "threads", "N", "L", "r", "ell", "dx", "J",
];

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse { line: usize, msg: String },
    Validation(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, msg } => write!(f, "PARSE_ERROR line {line}: {msg}"),
            ConfigError::Validation(msg) => write!(f, "VALIDATION_ERROR: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<llhmm::Error> for ConfigError {
    fn from(e: llhmm::Error) -> Self {
        ConfigError::Validation(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Raw settings from a config file and flags. Later assignments win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| ConfigError::Parse { line: i + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, found `{line}`")))?;
            cfg.set(key.trim(), value.trim()).map_err(parse_err)?;
        }
        Ok(cfg)
    }

    /// Sets one key after checking that the value parses.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        if !KEYS.contains(&key) {
            return Err(format!("unknown key `{key}`"));
        }
        check_value(key, value)?;
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `(key, value)` pairs in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&str, &str)> {
        KEYS.iter().filter_map(|k| self.get(k).map(|v| (*k, v))).collect()
    }

    fn f64_or(&self, key: &str, default: f64) -> f64 {
        self.get(key).map_or(default, |v| v.parse().expect("checked on insert"))
    }

    fn usize_or(&self, key: &str, default: usize) -> usize {
        self.get(key).map_or(default, |v| v.parse().expect("checked on insert"))
    }

    pub fn threads(&self) -> Option<usize> {
        self.get("threads").map(|v| v.parse().expect("checked on insert"))
    }

    pub fn out_or(&self, default: &str) -> PathBuf {
        PathBuf::from(self.get("out").unwrap_or(default))
    }

    pub fn field_or(&self, default: NamedField) -> FieldSpec {
        self.get("field").map_or(default, |v| v.parse().expect("checked on insert")).into()
    }

    pub fn kernel_or(&self, p: u32, q: i32) -> Result<KernelSpec> {
        let p = self.get("kernel_p").map_or(p, |v| v.parse().expect("checked on insert"));
        let q = self.get("kernel_q").map_or(q, |v| v.parse().expect("checked on insert"));
        Ok(KernelSpec::build(p, q)?)
    }

    pub fn m0_or(&self, default: Vec3) -> Vec3 {
        self.get("m0").map_or(default, |v| parse_vec3(v).expect("checked on insert"))
    }

    pub fn eps_list_or(&self, default: &[f64]) -> Vec<f64> {
        self.get("eps_list").map_or_else(|| default.to_vec(), |v| parse_list(v).expect("checked on insert"))
    }

    /// `tau` if given, otherwise `tau_ratio * eps`.
    fn tau_for(&self, eps: f64, default_ratio: f64) -> f64 {
        self.get("tau").map_or_else(|| self.f64_or("tau_ratio", default_ratio) * eps, |v| v.parse().unwrap())
    }

    /// Single-spin HMM. Defaults: circular field, `eps = 0.01`,
    /// `tau = 5 eps`, `T = 2 pi` in 20 macro steps, kernel (5, 4),
    /// `micro_dt = eps / 100`, `m0 = (1, 0, 0)`, `beta = gamma = 1`.
    pub fn hmm(&self) -> Result<HmmConfig> {
        let eps = self.f64_or("eps", 0.01);
        let t_end = self.f64_or("T", 2.0 * PI);
        let mut c = HmmConfig::new(
            eps,
            self.tau_for(eps, 5.0),
            self.f64_or("macro_dt", t_end / 20.0),
            t_end,
            self.kernel_or(5, 4)?,
            self.field_or(NamedField::Circular),
            self.m0_or(Vec3::E_X),
        );
        c.micro_dt = self.f64_or("micro_dt", eps / 100.0);
        c.beta = self.f64_or("beta", 1.0);
        c.gamma = self.f64_or("gamma", 1.0);
        c.validate()?;
        Ok(c)
    }

    /// Direct simulation with the [`RunConfig::hmm`] defaults and
    /// `dt = micro_dt`, default the largest step `<= eps / 20` dividing `T`.
    pub fn dns(&self) -> Result<DnsConfig> {
        let eps = self.f64_or("eps", 0.01);
        let t_end = self.f64_or("T", 2.0 * PI);
        let mut c = DnsConfig::new(eps, t_end, self.field_or(NamedField::Circular), self.m0_or(Vec3::E_X));
        c.dt = self.f64_or("micro_dt", dns_step_for(t_end, eps));
        c.beta = self.f64_or("beta", 1.0);
        c.gamma = self.f64_or("gamma", 1.0);
        c.validate()?;
        Ok(c)
    }

    /// Experiment parameters on top of `base`; `macro_dt` must divide `T`.
    pub fn single_params(&self, base: SingleParams) -> Result<SingleParams> {
        let eps = self.f64_or("eps", base.eps);
        let t_end = self.f64_or("T", base.t_end);
        let macro_dt = self.f64_or("macro_dt", t_end / base.macro_steps as f64);
        let macro_steps = commensurate_steps(t_end, macro_dt).filter(|&n| n > 0).ok_or_else(|| {
            ConfigError::Validation(format!("T = {t_end} must be an integer multiple of macro_dt = {macro_dt}"))
        })?;
        let tau = self.tau_for(eps, base.tau_ratio);
        let micro_dt = self.f64_or("micro_dt", eps / base.micro_per_eps);
        let kernel = self.kernel_or(base.kernel.0, base.kernel.1)?;
        let field = match self.get("field") {
            Some(v) => FieldSpec::from(v.parse::<NamedField>().expect("checked on insert")),
            None => base.field.clone(),
        };
        let p = SingleParams {
            eps,
            tau_ratio: tau / eps,
            t_end,
            macro_steps,
            kernel: (kernel.p(), kernel.q()),
            beta: self.f64_or("beta", base.beta),
            gamma: self.f64_or("gamma", base.gamma),
            field,
            m0: self.m0_or(base.m0),
            micro_per_eps: eps / micro_dt,
        };
        p.hmm_config()?;
        Ok(p)
    }

    /// Chain HMM. Defaults are the chain experiment: `N = 100`, `L = 10`,
    /// `r = ell = 5`, `dx = 0.01`, `J = 1`, `eps = 0.01`, `tau = 5 eps`,
    /// `macro_dt = 0.075`, `T = 1.5`, kernel (5, 4) in space and time.
    pub fn chain(&self) -> Result<ChainConfig> {
        let mut c = ChainConfig::experiment();
        c.n = self.usize_or("N", c.n);
        c.l = self.usize_or("L", c.l);
        c.r = self.usize_or("r", c.r);
        c.ell = self.usize_or("ell", c.ell);
        c.dx = self.f64_or("dx", c.dx);
        c.j_exchange = self.f64_or("J", c.j_exchange);
        c.eps = self.f64_or("eps", c.eps);
        c.tau = self.tau_for(c.eps, 5.0);
        c.macro_dt = self.f64_or("macro_dt", c.macro_dt);
        c.micro_dt = self.f64_or("micro_dt", c.eps / 100.0);
        c.beta = self.f64_or("beta", c.beta);
        c.gamma = self.f64_or("gamma", c.gamma);
        c.t_end = self.f64_or("T", c.t_end);
        let kernel = self.kernel_or(c.kernel_time.p(), c.kernel_time.q())?;
        c.kernel_time = kernel.clone();
        c.kernel_space = kernel;
        if let Some(v) = self.get("field") {
            c.field = v.parse::<NamedField>().expect("checked on insert").into();
        }
        if let Some(v) = self.get("m0") {
            c.initial = llhmm::ChainInitial::Uniform(parse_vec3(v).expect("checked on insert"));
        }
        c.validate()?;
        Ok(c)
    }
}

fn check_value(key: &str, value: &str) -> std::result::Result<(), String> {
    let bad = |what: &str| format!("`{key}` expects {what}, found `{value}`");
    match key {
        "kernel_p" | "threads" | "N" | "L" | "r" | "ell" => {
            value.parse::<usize>().map(drop).map_err(|_| bad("a non-negative integer"))
        }
        "kernel_q" => value.parse::<i32>().map(drop).map_err(|_| bad("an integer")),
        "field" => value.parse::<NamedField>().map(drop).map_err(|e| e.to_string()),
        "m0" => parse_vec3(value).map(drop).ok_or_else(|| bad("three numbers")),
        "eps_list" => parse_list(value).filter(|l| !l.is_empty()).map(drop).ok_or_else(|| bad("a list of numbers")),
        "out" => {
            if value.is_empty() {
                Err(bad("a path"))
            } else {
                Ok(())
            }
        }
        _ => value
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(drop)
            .ok_or_else(|| bad("a finite number")),
    }
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split([',', ' ']).filter(|t| !t.is_empty()).map(|t| t.parse().ok()).collect()
}

fn parse_vec3(s: &str) -> Option<Vec3> {
    match parse_list(s)?.as_slice() {
        [x, y, z] => Some(Vec3::new(*x, *y, *z)),
        _ => None,
    }
}
