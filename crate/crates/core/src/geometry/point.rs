use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Points of ℝ³.
pub type Vec3 = Vector3<f64>;

/// Tolerance used for the unit-norm invariant of [`PointS3`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// A point of the unit 3-sphere in ℂ², stored as `(z1, z2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointS3 {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl PointS3 {
    pub const fn new(z1: Complex64, z2: Complex64) -> Self {
        PointS3 { z1, z2 }
    }

    /// Builds a point from `(Re z1, Im z1, Re z2, Im z2)`.
    pub const fn from_coords(c: [f64; 4]) -> Self {
        PointS3 {
            z1: Complex64::new(c[0], c[1]),
            z2: Complex64::new(c[2], c[3]),
        }
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.z1.re, self.z1.im, self.z2.re, self.z2.im]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    /// Radially projects onto the sphere. Panics on the zero vector.
    pub fn normalized(self) -> Self {
        let n = self.norm_sqr().sqrt();
        assert!(n > 0.0, "cannot normalize the origin of C^2");
        PointS3::new(self.z1 / n, self.z2 / n)
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Euclidean distance in ℂ² ≅ ℝ⁴.
    pub fn chordal_distance(&self, other: &PointS3) -> f64 {
        let a = self.coords();
        let b = other.coords();
        a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    /// Great-circle distance in the round metric.
    pub fn geodesic_distance(&self, other: &PointS3) -> f64 {
        let chord = self.chordal_distance(other);
        2.0 * (0.5 * chord).min(1.0).asin()
    }

    /// The conformal reflection through the Clifford torus, `(z1, z2) ↦ (z2, z1)`.
    pub fn swapped(&self) -> Self {
        PointS3::new(self.z2, self.z1)
    }

    pub fn dot(&self, other: &PointS3) -> f64 {
        let a = self.coords();
        let b = other.coords();
        a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
    }
}

/// Hopf coordinates `(η, ξ₁, ξ₂)` with `z1 = e^{iξ₁} cos η`, `z2 = e^{iξ₂} sin η`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfCoords {
    pub eta: f64,
    pub xi1: f64,
    pub xi2: f64,
}

/// Reduces an angle to `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl HopfCoords {
    /// Normalizes the angles into their half-open ranges and clamps `η` to `[0, π/2]`.
    pub fn new(eta: f64, xi1: f64, xi2: f64) -> Self {
        HopfCoords {
            eta: eta.clamp(0.0, FRAC_PI_2),
            xi1: normalize_angle(xi1),
            xi2: normalize_angle(xi2),
        }
    }
}

pub fn hopf_to_point(c: HopfCoords) -> PointS3 {
    PointS3::new(
        Complex64::from_polar(c.eta.cos(), c.xi1),
        Complex64::from_polar(c.eta.sin(), c.xi2),
    )
}

/// Inverse of [`hopf_to_point`]. An angle whose modulus vanishes is reported as 0.
pub fn point_to_hopf(p: PointS3) -> HopfCoords {
    let r1 = p.z1.norm();
    let r2 = p.z2.norm();
    let eta = r2.atan2(r1);
    let xi1 = if r1 > 1e-15 { normalize_angle(p.z1.arg()) } else { 0.0 };
    let xi2 = if r2 > 1e-15 { normalize_angle(p.z2.arg()) } else { 0.0 };
    HopfCoords { eta, xi1, xi2 }
}

/// A point of ℝ³ ∪ {∞}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EuclideanPoint {
    Finite(Vec3),
    Infinity,
}

impl EuclideanPoint {
    pub fn finite(&self) -> Option<Vec3> {
        match self {
            EuclideanPoint::Finite(v) => Some(*v),
            EuclideanPoint::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, EuclideanPoint::Infinity)
    }
}

impl From<Vec3> for EuclideanPoint {
    fn from(v: Vec3) -> Self {
        EuclideanPoint::Finite(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn close(a: [f64; 4], b: [f64; 4], tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn hopf_to_point_examples() {
        let p = hopf_to_point(HopfCoords::new(0.0, 0.0, 0.0));
        assert!(close(p.coords(), [1.0, 0.0, 0.0, 0.0], 1e-15));
        let p = hopf_to_point(HopfCoords::new(FRAC_PI_2, 0.0, 0.0));
        assert!(close(p.coords(), [0.0, 0.0, 1.0, 0.0], 1e-15));
        let p = hopf_to_point(HopfCoords::new(FRAC_PI_4, 0.0, 0.0));
        assert!(close(p.coords(), [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0], 1e-15));
        assert!((p.z1.norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn point_to_hopf_examples() {
        let c = point_to_hopf(PointS3::from_coords([FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0]));
        assert!((c.eta - FRAC_PI_4).abs() < 1e-15 && c.xi1 == 0.0 && c.xi2 == 0.0);
        let c = point_to_hopf(PointS3::from_coords([0.0, 1.0, 0.0, 0.0]));
        assert_eq!(c.eta, 0.0);
        assert!((c.xi1 - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(c.xi2, 0.0);
    }

    #[test]
    fn angles_are_half_open() {
        assert_eq!(normalize_angle(TAU), 0.0);
        assert_eq!(normalize_angle(-1e-300), 0.0);
        let c = HopfCoords::new(2.0, -0.5, 7.0);
        assert_eq!(c.eta, FRAC_PI_2);
        assert!(c.xi1 >= 0.0 && c.xi1 < TAU && c.xi2 < TAU);
    }
}
