use nalgebra::Rotation3;

use super::point::{EuclideanPoint, PointS3, Vec3};
use super::polyline::{AmbientPoint, Polyline};
use super::stereo::StereoChart;
use super::GeometryError;

/// One generator of the Möbius group of ℝ³ ∪ {∞}.
#[derive(Clone, Debug, PartialEq)]
pub enum MobiusPrimitive {
    /// Reflection in the plane `{x · normal = offset}`; `normal` is unit length.
    PlaneReflection { normal: Vec3, offset: f64 },
    /// Inversion in the sphere of the given center and radius.
    SphereInversion { center: Vec3, radius: f64 },
    /// `x ↦ scale · rotation · x + translation`.
    Similarity { scale: f64, rotation: Rotation3<f64>, translation: Vec3 },
    /// `(z1, z2) ↦ (z2, z1)` on S³, seen through the default chart on ℝ³.
    CliffordSwap,
}

impl MobiusPrimitive {
    pub fn plane_reflection(normal: Vec3, offset: f64) -> Self {
        let n = normal.norm();
        MobiusPrimitive::PlaneReflection { normal: normal / n, offset: offset / n }
    }

    fn apply_r3(&self, p: &EuclideanPoint) -> EuclideanPoint {
        use EuclideanPoint::{Finite, Infinity};
        match (self, p) {
            (MobiusPrimitive::PlaneReflection { .. }, Infinity) => Infinity,
            (MobiusPrimitive::PlaneReflection { normal, offset }, Finite(x)) => {
                Finite(x - normal * (2.0 * (x.dot(normal) - offset)))
            }
            (MobiusPrimitive::SphereInversion { center, .. }, Infinity) => Finite(*center),
            (MobiusPrimitive::SphereInversion { center, radius }, Finite(x)) => {
                let d = x - center;
                let r2 = d.norm_squared();
                if r2 == 0.0 {
                    Infinity
                } else {
                    Finite(center + d * (radius * radius / r2))
                }
            }
            (MobiusPrimitive::Similarity { .. }, Infinity) => Infinity,
            (MobiusPrimitive::Similarity { scale, rotation, translation }, Finite(x)) => {
                Finite(rotation * x * *scale + translation)
            }
            (MobiusPrimitive::CliffordSwap, q) => {
                let chart = StereoChart::default();
                chart.project(&chart.lift(q).swapped())
            }
        }
    }

    fn apply_s3(&self, p: &PointS3) -> PointS3 {
        match self {
            MobiusPrimitive::CliffordSwap => p.swapped(),
            other => {
                let chart = StereoChart::default();
                chart.lift(&other.apply_r3(&chart.project(p)))
            }
        }
    }

    fn inverse(&self) -> Self {
        match self {
            MobiusPrimitive::Similarity { scale, rotation, translation } => {
                let rinv = rotation.inverse();
                MobiusPrimitive::Similarity {
                    scale: 1.0 / scale,
                    rotation: rinv,
                    translation: -(rinv * translation) / *scale,
                }
            }
            involution => involution.clone(),
        }
    }

    fn reverses_orientation(&self) -> bool {
        matches!(
            self,
            MobiusPrimitive::PlaneReflection { .. } | MobiusPrimitive::SphereInversion { .. }
        )
    }
}

/// A composition of primitives; the first primitive is applied first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MobiusMap {
    primitives: Vec<MobiusPrimitive>,
}

impl MobiusMap {
    pub fn identity() -> Self {
        MobiusMap::default()
    }

    pub fn from_primitives(primitives: Vec<MobiusPrimitive>) -> Self {
        MobiusMap { primitives }
    }

    pub fn primitives(&self) -> &[MobiusPrimitive] {
        &self.primitives
    }

    /// `self` followed by `prim`.
    pub fn then(mut self, prim: MobiusPrimitive) -> Self {
        self.primitives.push(prim);
        self
    }

    /// `self` followed by `other`.
    pub fn compose(mut self, other: &MobiusMap) -> Self {
        self.primitives.extend(other.primitives.iter().cloned());
        self
    }

    pub fn inverse(&self) -> Self {
        MobiusMap { primitives: self.primitives.iter().rev().map(MobiusPrimitive::inverse).collect() }
    }

    pub fn is_orientation_preserving(&self) -> bool {
        self.primitives.iter().filter(|p| p.reverses_orientation()).count() % 2 == 0
    }

    pub fn apply(&self, p: &EuclideanPoint) -> EuclideanPoint {
        self.primitives.iter().fold(*p, |q, prim| prim.apply_r3(&q))
    }

    pub fn apply_s3(&self, p: &PointS3) -> PointS3 {
        self.primitives.iter().fold(*p, |q, prim| prim.apply_s3(&q))
    }
}

/// The S³ map `(z1, z2) ↦ (z2, z1)`: an involution exchanging `H₀` and `H₁` and
/// fixing the Clifford torus setwise.
pub fn clifford_swap() -> MobiusMap {
    MobiusMap::from_primitives(vec![MobiusPrimitive::CliffordSwap])
}

/// Points a Möbius map can act on vertexwise.
pub trait MobiusTarget: AmbientPoint {
    fn mobius_image(m: &MobiusMap, p: &Self) -> Option<Self>;
}

impl MobiusTarget for Vec3 {
    fn mobius_image(m: &MobiusMap, p: &Self) -> Option<Self> {
        m.apply(&EuclideanPoint::Finite(*p)).finite()
    }
}

impl MobiusTarget for PointS3 {
    fn mobius_image(m: &MobiusMap, p: &Self) -> Option<Self> {
        Some(m.apply_s3(p))
    }
}

/// Vertexwise image of a curve. Fails with the index of the first vertex sent to ∞.
pub fn apply_mobius<P: MobiusTarget>(m: &MobiusMap, c: &Polyline<P>) -> Result<Polyline<P>, GeometryError> {
    c.try_map(|i, p| P::mobius_image(m, p).ok_or(GeometryError::VertexAtInfinity(i)))
}
