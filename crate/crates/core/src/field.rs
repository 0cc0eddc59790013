//! Two-scale external fields `H(t, z)`, 1-periodic in the fast variable `z`.
//!
//! The physical field seen by a spin is `H(t, t / eps)`; the averaged
//! dynamics are driven by the period mean `int_0^1 H(t, s) ds`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Nodes of the periodic trapezoidal rule used for field means without a
/// closed form.
const MEAN_NODES: usize = 1000;

/// Fields used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedField {
    /// Time-independent field `h`.
    Constant(Vec3),
    /// `(0,0,1) + (sin 2 pi z, cos 2 pi z, 0)`, a field rotating in the plane.
    Circular,
    /// `(0,0,1) + (cos 2 pi z, cos 2 pi z, 0)`, linearly polarized.
    CircularCos,
    /// `(0,0,1) + (sin^2 2 pi z, cos^2 2 pi z, 0)`, nonzero fast mean.
    Squared,
    /// `(1 + cos(0.43 t) + cos^2 2 pi z) (0,0,1)`, slowly modulated pulse.
    ChainPulse,
}

impl NamedField {
    pub fn name(&self) -> &'static str {
        match self {
            NamedField::Constant(_) => "constant",
            NamedField::Circular => "circular",
            NamedField::CircularCos => "circular_cos",
            NamedField::Squared => "squared",
            NamedField::ChainPulse => "chain_pulse",
        }
    }

    fn eval(&self, t: f64, z: f64) -> Vec3 {
        let phase = 2.0 * PI * z;
        match *self {
            NamedField::Constant(h) => h,
            NamedField::Circular => Vec3::new(phase.sin(), phase.cos(), 1.0),
            NamedField::CircularCos => {
                let c = phase.cos();
                Vec3::new(c, c, 1.0)
            }
            NamedField::Squared => {
                let (s, c) = phase.sin_cos();
                Vec3::new(s * s, c * c, 1.0)
            }
            NamedField::ChainPulse => {
                let c = phase.cos();
                Vec3::new(0.0, 0.0, 1.0 + (0.43 * t).cos() + c * c)
            }
        }
    }

    fn mean(&self, t: f64) -> Vec3 {
        match *self {
            NamedField::Constant(h) => h,
            NamedField::Circular | NamedField::CircularCos => Vec3::E_Z,
            NamedField::Squared => Vec3::new(0.5, 0.5, 1.0),
            NamedField::ChainPulse => Vec3::new(0.0, 0.0, 1.5 + (0.43 * t).cos()),
        }
    }
}

/// Parses the field names accepted in run configurations. `constant` needs
/// a vector and is built with [`NamedField::Constant`] directly.
impl FromStr for NamedField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "circular" => Ok(NamedField::Circular),
            "circular_cos" => Ok(NamedField::CircularCos),
            "squared" => Ok(NamedField::Squared),
            "chain_pulse" => Ok(NamedField::ChainPulse),
            "constant" => Ok(NamedField::Constant(Vec3::E_Z)),
            other => Err(Error::Parameter(format!(
                "unknown field '{other}' (expected constant|circular|circular_cos|squared|chain_pulse)"
            ))),
        }
    }
}

type VecFn = Arc<dyn Fn(f64) -> Vec3 + Send + Sync>;

/// An additive field `slow(t) + fast(z)` given by closures. `fast` must be
/// 1-periodic.
#[derive(Clone)]
pub struct CustomField {
    slow: VecFn,
    fast: VecFn,
}

impl CustomField {
    pub fn new(
        slow: impl Fn(f64) -> Vec3 + Send + Sync + 'static,
        fast: impl Fn(f64) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        CustomField { slow: Arc::new(slow), fast: Arc::new(fast) }
    }
}

impl fmt::Debug for CustomField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomField { .. }")
    }
}

#[derive(Debug, Clone)]
pub enum FieldSpec {
    Named(NamedField),
    Custom(CustomField),
}

impl From<NamedField> for FieldSpec {
    fn from(f: NamedField) -> Self {
        FieldSpec::Named(f)
    }
}

impl FieldSpec {
    /// `H(t, z)` with slow time `t` and fast phase `z`.
    #[inline]
    pub fn eval(&self, t: f64, z: f64) -> Vec3 {
        match self {
            FieldSpec::Named(f) => f.eval(t, z),
            FieldSpec::Custom(c) => (c.slow)(t) + (c.fast)(z),
        }
    }

    /// `H(t, t / eps)`, skipping the `eps` check for inner loops.
    #[inline]
    pub(crate) fn at(&self, t: f64, eps: f64) -> Vec3 {
        self.eval(t, t / eps)
    }

    /// The physical field `H(t, t / eps)`.
    pub fn eval_two_scale(&self, t: f64, eps: f64) -> Result<Vec3> {
        if !(eps > 0.0) {
            return Err(Error::Parameter(format!("eps = {eps} must be positive")));
        }
        Ok(self.at(t, eps))
    }

    /// Period mean `int_0^1 H(t, s) ds`, closed form for named fields.
    pub fn effective(&self, t: f64) -> Vec3 {
        match self {
            FieldSpec::Named(f) => f.mean(t),
            FieldSpec::Custom(_) => self.mean_by_quadrature(t),
        }
    }

    /// Period mean by the periodic trapezoidal rule on 10^3 nodes.
    pub fn mean_by_quadrature(&self, t: f64) -> Vec3 {
        let h = 1.0 / MEAN_NODES as f64;
        let mut acc = Vec3::ZERO;
        for k in 0..MEAN_NODES {
            acc += self.eval(t, k as f64 * h);
        }
        acc * h
    }

    pub fn name(&self) -> &'static str {
        match self {
            FieldSpec::Named(f) => f.name(),
            FieldSpec::Custom(_) => "custom",
        }
    }

    pub fn named(&self) -> Option<NamedField> {
        match self {
            FieldSpec::Named(f) => Some(*f),
            FieldSpec::Custom(_) => None,
        }
    }
}
