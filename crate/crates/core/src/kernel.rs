//! Averaging kernels with vanishing moments.
//!
//! A kernel of class (p, q) is supported on [-1/2, 1/2], is even, integrates
//! to one, has vanishing moments of order 1..=p, and its (q+1)-th derivative
//! has bounded variation. Averaging a 1-periodic function oscillating at
//! period `eps` against the scaled kernel `K_tau(t) = K(t / tau) / tau`
//! then converges to the mean like `(eps / tau)^(q + 2)`.
//!
//! The family built here is `K(t) = P(t^2) (1 - 4 t^2)^(q + 1)`: the window
//! factor supplies `q + 1` vanishing derivatives at the support ends, and
//! the even polynomial `P` of degree `2 floor(p / 2)` enforces the even
//! moment conditions (odd moments vanish by symmetry).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::{commensurate_steps, gauss_legendre};

/// Panels of the composite 5-point rule used by [`KernelSpec::moment`]
/// (10^4 nodes in total).
const MOMENT_PANELS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    p: u32,
    q: i32,
    coeffs: Vec<f64>,
}

impl KernelSpec {
    /// Solves the even-moment system for a kernel of class (p, q).
    pub fn build(p: u32, q: i32) -> Result<Self> {
        if p < 1 {
            return Err(Error::Parameter(format!("kernel moment order p = {p} must be >= 1")));
        }
        if q < -1 {
            return Err(Error::Parameter(format!("kernel smoothness q = {q} must be >= -1")));
        }
        let n = (p / 2) as usize + 1;
        let power = (q + 1) as u32;
        let a = DMatrix::from_fn(n, n, |i, j| window_moment(i + j, power));
        let mut b = DVector::zeros(n);
        b[0] = 1.0;
        let coeffs = a
            .lu()
            .solve(&b)
            .ok_or(Error::SingularMomentSystem { p, q })?;
        Ok(KernelSpec { p, q, coeffs: coeffs.iter().copied().collect() })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> i32 {
        self.q
    }

    /// Coefficients `c_j` of the even polynomial factor `sum_j c_j t^(2j)`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t2 = t * t;
        if !(t2 <= 0.25) {
            return 0.0;
        }
        let poly = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t2 + c);
        let window = 1.0 - 4.0 * t2;
        poly * window.powi(self.q + 1)
    }

    /// `K_tau(t) = K(t / tau) / tau`.
    pub fn eval_scaled(&self, tau: f64, t: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(self.eval(t / tau) / tau)
    }

    /// `r`-th moment by composite Gauss-Legendre quadrature.
    pub fn moment(&self, r: u32) -> f64 {
        let r = r as i32;
        gauss_legendre(|t| self.eval(t) * t.powi(r), -0.5, 0.5, MOMENT_PANELS)
    }

    pub fn scaled(&self, tau: f64) -> Result<ScaledKernel> {
        check_tau(tau)?;
        Ok(ScaledKernel { base: self.clone(), tau })
    }

    /// Kernel-weighted average of `f` over `[center - tau/2, center + tau/2]`,
    /// `int K_tau(s - center) f(s) ds`, by the trapezoidal rule on a grid of
    /// spacing `step`. `step` must divide `tau / 2`.
    pub fn weighted_average<F: Fn(f64) -> f64>(
        &self,
        tau: f64,
        f: F,
        center: f64,
        step: f64,
    ) -> Result<f64> {
        let scaled = self.scaled(tau)?;
        let half = commensurate_steps(tau / 2.0, step).filter(|&n| n > 0).ok_or_else(|| {
            Error::Parameter(format!("grid step {step} does not divide tau/2 = {}", tau / 2.0))
        })?;
        let weights = scaled.trapezoid_weights(half);
        let h = tau / (2 * half) as f64;
        Ok(weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * f(center + (k as f64 - half as f64) * h))
            .sum())
    }
}

/// A kernel stretched over a window of length `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledKernel {
    base: KernelSpec,
    tau: f64,
}

impl ScaledKernel {
    pub fn base(&self) -> &KernelSpec {
        &self.base
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.base.eval(t / self.tau) / self.tau
    }

    /// Trapezoidal quadrature weights `w_k` such that
    /// `sum_k w_k g(s_k) ~ int K_tau(s) g(s) ds` on the `2 n + 1` samples
    /// `s_k = (k - n) tau / (2 n)`. The kernel is sampled at the exact
    /// fractions `(k - n) / (2 n)` so the support ends are never lost to
    /// rounding.
    pub fn trapezoid_weights(&self, half_steps: usize) -> Vec<f64> {
        let n = half_steps;
        if n == 0 {
            return vec![1.0];
        }
        let h = self.tau / (2 * n) as f64;
        (0..=2 * n)
            .map(|k| {
                let frac = (k as f64 - n as f64) / (2 * n) as f64;
                let end = if k == 0 || k == 2 * n { 0.5 } else { 1.0 };
                end * h * self.base.eval(frac) / self.tau
            })
            .collect()
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("averaging window tau = {tau} must be positive")))
    }
}

/// `int_{-1/2}^{1/2} t^(2k) (1 - 4 t^2)^a dt`, evaluated exactly by expanding
/// the window binomially.
fn window_moment(k: usize, a: u32) -> f64 {
    // Substituting t = u / 2 gives 2^-(2k+1) int_{-1}^{1} u^(2k) (1 - u^2)^a du.
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=a as usize {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * binom * 2.0 / (2 * (k + j) + 1) as f64;
        binom = binom * (a as usize - j) as f64 / (j + 1) as f64;
    }
    total * 0.5f64.powi(2 * k as i32 + 1)
}
