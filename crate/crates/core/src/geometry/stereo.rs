//! Stereographic charts of S³.
//!
//! The default chart projects from the pole `(z1, z2) = (i, 0)`. Writing a point of S³ as
//! `(x1, x2, x3, x4) = (Re z1, Im z1, Re z2, Im z2)`, the chart is
//!
//! ```text
//! (x1, x2, x3, x4) ↦ (x3, x4, x1) / (1 − x2)
//! ```
//!
//! i.e. the coordinate permutation `(X, Y, Z, W) = (x3, x4, x1, x2)` followed by the
//! projection from `W = 1`. In this chart `H₀ = {z2 = 0}` becomes the z-axis (through ∞),
//! `H₁ = {z1 = 0}` becomes the unit circle in the plane `z = 0`, and the Clifford torus
//! lands on the torus of revolution about the z-axis with core radius √2 and tube radius 1.
//! Charts with any other pole first apply the rotation of ℝ⁴ in the plane spanned by
//! the pole and the default pole that carries one onto the other.

use nalgebra::{Matrix4, Vector4};

use super::point::{EuclideanPoint, PointS3, Vec3};

/// The pole `(i, 0)` of the default chart.
pub const DEFAULT_POLE: PointS3 = PointS3::from_coords([0.0, 1.0, 0.0, 0.0]);

const INFINITY_GAP: f64 = 1e-15;

/// A stereographic chart `S³ \ {pole} → ℝ³`.
#[derive(Clone, Debug, PartialEq)]
pub struct StereoChart {
    pole: PointS3,
    // Rotation of ℝ⁴ taking `pole` to the default pole.
    rotation: Matrix4<f64>,
}

impl Default for StereoChart {
    fn default() -> Self {
        StereoChart { pole: DEFAULT_POLE, rotation: Matrix4::identity() }
    }
}

fn to_vec4(p: &PointS3) -> Vector4<f64> {
    let c = p.coords();
    Vector4::new(c[0], c[1], c[2], c[3])
}

fn from_vec4(v: &Vector4<f64>) -> PointS3 {
    PointS3::from_coords([v[0], v[1], v[2], v[3]])
}

impl StereoChart {
    pub fn new(pole: PointS3) -> Self {
        let pole = pole.normalized();
        let p = to_vec4(&pole);
        let n = to_vec4(&DEFAULT_POLE);
        let cos = p.dot(&n).clamp(-1.0, 1.0);
        let rotation = if cos > 1.0 - 1e-15 {
            Matrix4::identity()
        } else if cos < -1.0 + 1e-15 {
            // half-turn in the (x1, x2) plane
            Matrix4::from_diagonal(&Vector4::new(-1.0, -1.0, 1.0, 1.0))
        } else {
            let u = p;
            let v = (n - u * cos).normalize();
            let sin = (1.0 - cos * cos).sqrt();
            Matrix4::identity() + (u * u.transpose() + v * v.transpose()) * (cos - 1.0)
                + (v * u.transpose() - u * v.transpose()) * sin
        };
        StereoChart { pole, rotation }
    }

    pub fn pole(&self) -> PointS3 {
        self.pole
    }

    pub fn project(&self, p: &PointS3) -> EuclideanPoint {
        let r = self.rotation * to_vec4(p);
        let (x1, x2, x3, x4) = (r[0], r[1], r[2], r[3]);
        let gap = 1.0 - x2;
        if gap <= INFINITY_GAP {
            return EuclideanPoint::Infinity;
        }
        EuclideanPoint::Finite(Vec3::new(x3, x4, x1) / gap)
    }

    pub fn lift(&self, q: &EuclideanPoint) -> PointS3 {
        match q {
            EuclideanPoint::Infinity => self.pole,
            EuclideanPoint::Finite(q) => {
                let r2 = q.norm_squared();
                let d = 1.0 + r2;
                let x3 = 2.0 * q.x / d;
                let x4 = 2.0 * q.y / d;
                let x1 = 2.0 * q.z / d;
                let x2 = (r2 - 1.0) / d;
                let v = self.rotation.transpose() * Vector4::new(x1, x2, x3, x4);
                from_vec4(&v)
            }
        }
    }

    /// Conformal factor `|d(lift)|` at a finite chart point.
    pub fn conformal_factor(&self, q: &Vec3) -> f64 {
        2.0 / (1.0 + q.norm_squared())
    }
}

/// Stereographic projection from an arbitrary pole.
pub fn stereographic(p: &PointS3, pole: &PointS3) -> EuclideanPoint {
    StereoChart::new(*pole).project(p)
}

/// Inverse of the default chart.
pub fn inverse_stereographic(q: &EuclideanPoint) -> PointS3 {
    StereoChart::default().lift(q)
}

/// Point of the Clifford torus image in the default chart,
/// `((√2 + cos s) cos t, (√2 + cos s) sin t, sin s)`.
pub fn clifford_torus_point(s: f64, t: f64) -> Vec3 {
    let r = std::f64::consts::SQRT_2 + s.cos();
    Vec3::new(r * t.cos(), r * t.sin(), s.sin())
}

/// Signed distance to the Clifford torus image in the default chart (negative inside the
/// solid torus containing the unit circle).
pub fn clifford_torus_signed_distance(x: &Vec3) -> f64 {
    let rho = (x.x * x.x + x.y * x.y).sqrt();
    ((rho - std::f64::consts::SQRT_2).powi(2) + x.z * x.z).sqrt() - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hopf_to_point, HopfCoords};
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;
    use std::f64::consts::FRAC_PI_4;

    fn random_point(rng: &mut SplitMix64) -> PointS3 {
        loop {
            let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let p = PointS3::from_coords(c);
            if p.norm_sqr() > 1e-3 && p.norm_sqr() <= 1.0 {
                return p.normalized();
            }
        }
    }

    #[test]
    fn antipode_of_pole_maps_to_origin() {
        let chart = StereoChart::default();
        let anti = PointS3::from_coords([0.0, -1.0, 0.0, 0.0]);
        assert_eq!(chart.project(&anti), EuclideanPoint::Finite(Vec3::zeros()));
        assert_eq!(chart.project(&DEFAULT_POLE), EuclideanPoint::Infinity);

        let mut rng = SplitMix64::seed_from_u64(3);
        for _ in 0..20 {
            let pole = random_point(&mut rng);
            let a = PointS3::from_coords(pole.coords().map(|x| -x));
            let q = stereographic(&a, &pole).finite().unwrap();
            assert!(q.norm() < 1e-12);
            assert!(stereographic(&pole, &pole).is_infinite());
        }
    }

    #[test]
    fn clifford_torus_lands_on_tube_of_radius_one() {
        let chart = StereoChart::default();
        for i in 0..40 {
            for j in 0..40 {
                let c = HopfCoords::new(FRAC_PI_4, 0.3 + i as f64 * 0.157, 0.1 + j as f64 * 0.157);
                let q = chart.project(&hopf_to_point(c)).finite().unwrap();
                assert!(clifford_torus_signed_distance(&q).abs() < 1e-12);
            }
        }
        let q = clifford_torus_point(0.7, 2.1);
        assert!(clifford_torus_signed_distance(&q).abs() < 1e-14);
    }

    #[test]
    fn hopf_circles_in_default_chart() {
        let chart = StereoChart::default();
        for k in 0..12 {
            let t = 0.1 + k as f64 * 0.5;
            let h0 = chart.project(&hopf_to_point(HopfCoords::new(0.0, t, 0.0))).finite().unwrap();
            assert!(h0.x.abs() < 1e-12 && h0.y.abs() < 1e-12);
            let h1 = chart.project(&hopf_to_point(HopfCoords::new(std::f64::consts::FRAC_PI_2, 0.0, t))).finite().unwrap();
            assert!((h1.norm() - 1.0).abs() < 1e-12 && h1.z.abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_random_points() {
        let mut rng = SplitMix64::seed_from_u64(11);
        let pole = random_point(&mut rng);
        let charts = [StereoChart::default(), StereoChart::new(pole)];
        for chart in &charts {
            for _ in 0..1000 {
                let p = random_point(&mut rng);
                let back = chart.lift(&chart.project(&p));
                assert!(back.chordal_distance(&p) < 1e-10);
                let q = Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                let again = chart.project(&chart.lift(&EuclideanPoint::Finite(q))).finite().unwrap();
                assert!((again - q).norm() < 1e-10 * (1.0 + q.norm_squared()));
            }
        }
    }
}
