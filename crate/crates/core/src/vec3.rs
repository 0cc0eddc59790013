//! Three-vector algebra and the Landau-Lifschitz right-hand sides.
//!
//! Every quantity is dimensionless. Magnetizations, fields and fluxes all
//! live in [`Vec3`]; the skew-matrix form `H m` used in the analysis of the
//! averaged equation is the cross product `m x H`, so no matrix type exists.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// A dense 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const E_X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const E_Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const E_Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    /// Builds a vector and rejects non-finite components.
    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vec3::new(x, y, z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Parameter(format!("non-finite vector component in {v}")))
        }
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Vec3) -> Vec3 {
        cross(self, other)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    /// Largest absolute component.
    #[inline]
    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        self.x -= o.x;
        self.y -= o.y;
        self.z -= o.z;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// A unit magnetic moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spin(Vec3);

impl Spin {
    /// Tolerance on `| |v| - 1 |` accepted by [`Spin::new`].
    pub const UNIT_TOLERANCE: f64 = 1e-9;

    pub fn new(v: Vec3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::Parameter(format!("spin {v} is not finite")));
        }
        let dev = (v.norm() - 1.0).abs();
        if dev > Self::UNIT_TOLERANCE {
            return Err(Error::Parameter(format!(
                "spin {v} is not a unit vector (| |v| - 1 | = {dev:e})"
            )));
        }
        Ok(Spin(v))
    }

    /// Normalizes `v` onto the unit sphere.
    pub fn from_direction(v: Vec3) -> Result<Self> {
        v.normalized()
            .map(Spin)
            .ok_or_else(|| Error::Parameter(format!("cannot normalize {v}")))
    }

    /// Wraps a macro state whose length may have drifted from one.
    pub fn unnormalized(v: Vec3) -> Self {
        Spin(v)
    }

    pub fn vec(self) -> Vec3 {
        self.0
    }
}

impl From<Spin> for Vec3 {
    fn from(s: Spin) -> Vec3 {
        s.0
    }
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    Vec3::new(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )
}

/// Full Landau-Lifschitz right-hand side `-beta m x h - gamma m x (m x h)`.
#[inline]
pub fn ll_rhs(m: Vec3, h: Vec3, beta: f64, gamma: f64) -> Vec3 {
    let mxh = cross(m, h);
    -(mxh * beta) - cross(m, mxh) * gamma
}

/// Precession-only right-hand side `-beta m x h`.
#[inline]
pub fn precession_rhs(m: Vec3, h: Vec3, beta: f64) -> Vec3 {
    -(cross(m, h) * beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cross_basis() {
        assert_eq!(cross(Vec3::E_X, Vec3::E_Y), Vec3::E_Z);
        assert_eq!(cross(Vec3::E_Z, Vec3::E_X), Vec3::E_Y);
        let a = Vec3::new(0.3, -1.2, 2.5);
        assert_eq!(cross(a, a), Vec3::ZERO);
    }

    #[test]
    fn ll_rhs_hand_values() {
        assert_eq!(ll_rhs(Vec3::E_Z, Vec3::E_Z, 1.3, 0.7), Vec3::ZERO);
        assert_eq!(ll_rhs(Vec3::E_X, Vec3::E_Z, 1.0, 0.0), Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(ll_rhs(Vec3::E_X, Vec3::E_Z, 1.0, 1.0), Vec3::new(0.0, 1.0, 1.0));
    }

    #[test]
    fn precession_hand_values() {
        assert_eq!(precession_rhs(Vec3::E_X, Vec3::E_Z, 1.0), Vec3::new(0.0, 1.0, 0.0));
        let m = Vec3::new(0.2, 0.4, -0.1);
        assert_eq!(precession_rhs(m, m * 3.0, 2.0).max_abs(), 0.0);
        assert_eq!(precession_rhs(m, Vec3::new(1.0, 2.0, 3.0), 0.0).max_abs(), 0.0);
    }

    #[test]
    fn spin_rejects_non_unit() {
        assert!(Spin::new(Vec3::new(1.0, 0.0, 1e-12)).is_ok());
        assert!(Spin::new(Vec3::new(1.1, 0.0, 0.0)).is_err());
        assert!(Spin::new(Vec3::new(f64::NAN, 0.0, 0.0)).is_err());
        let s = Spin::from_direction(Vec3::new(3.0, 4.0, 0.0)).unwrap();
        assert!((s.vec().norm() - 1.0).abs() < 1e-15);
        assert!(Vec3::try_new(f64::INFINITY, 0.0, 0.0).is_err());
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn ll_rhs_orthogonal_to_m(m in vec3(), h in vec3(), beta in -3.0..3.0f64, gamma in 0.0..3.0f64) {
            let rhs = ll_rhs(m, h, beta, gamma);
            prop_assert!(rhs.dot(m).abs() <= 1e-14 * rhs.norm() * m.norm());
        }

        #[test]
        fn undamped_ll_equals_precession(m in vec3(), h in vec3(), beta in -3.0..3.0f64) {
            prop_assert_eq!(ll_rhs(m, h, beta, 0.0), precession_rhs(m, h, beta));
        }

        #[test]
        fn precession_linear_in_field(m in vec3(), h in vec3(), a in -4.0..4.0f64, beta in -3.0..3.0f64) {
            let lhs = precession_rhs(m, h * a, beta);
            let rhs = precession_rhs(m, h, beta) * a;
            prop_assert!((lhs - rhs).max_abs() <= 1e-13 * (1.0 + rhs.max_abs()));
        }
    }
}
