use std::fmt::Debug;

use super::point::{PointS3, Vec3};
use super::GeometryError;

/// Points a [`Polyline`] can live on.
pub trait AmbientPoint: Copy + Debug + PartialEq {
    /// Header tag used in curve files.
    const TAG: &'static str;

    /// Coordinates in ℝ⁴ (ℝ³ points are padded with a zero).
    fn embed(&self) -> [f64; 4];

    /// Length of the segment `[a, b]` in the ambient metric.
    fn segment_length(a: &Self, b: &Self) -> f64;

    /// Point halfway along the segment `[a, b]`.
    fn midpoint(a: &Self, b: &Self) -> Self;
}

impl AmbientPoint for Vec3 {
    const TAG: &'static str = "r3";

    fn embed(&self) -> [f64; 4] {
        [self.x, self.y, self.z, 0.0]
    }

    fn segment_length(a: &Self, b: &Self) -> f64 {
        (a - b).norm()
    }

    fn midpoint(a: &Self, b: &Self) -> Self {
        (a + b) * 0.5
    }
}

impl AmbientPoint for PointS3 {
    const TAG: &'static str = "s3";

    fn embed(&self) -> [f64; 4] {
        self.coords()
    }

    /// Segments on S³ are great-circle arcs between consecutive vertices.
    fn segment_length(a: &Self, b: &Self) -> f64 {
        a.geodesic_distance(b)
    }

    fn midpoint(a: &Self, b: &Self) -> Self {
        let ca = a.coords();
        let cb = b.coords();
        PointS3::from_coords([ca[0] + cb[0], ca[1] + cb[1], ca[2] + cb[2], ca[3] + cb[3]])
            .normalized()
    }
}

/// A sampled curve: ordered vertices, optionally closed by a segment back to the first vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline<P> {
    vertices: Vec<P>,
    closed: bool,
}

pub type Curve3 = Polyline<Vec3>;
pub type CurveS3 = Polyline<PointS3>;

impl<P: AmbientPoint> Polyline<P> {
    /// Validates that consecutive vertices (cyclically, when closed) are distinct and
    /// that there are at least two vertices.
    pub fn new(vertices: Vec<P>, closed: bool) -> Result<Self, GeometryError> {
        if vertices.len() < 2 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        let n = vertices.len();
        let pairs = if closed { n } else { n - 1 };
        for i in 0..pairs {
            let j = (i + 1) % n;
            if P::segment_length(&vertices[i], &vertices[j]) == 0.0 {
                return Err(GeometryError::RepeatedVertex(j));
            }
        }
        Ok(Polyline { vertices, closed })
    }

    pub fn vertices(&self) -> &[P] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<P> {
        self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    /// Iterates over segments, including the closing one for closed curves.
    pub fn segments(&self) -> impl Iterator<Item = (P, P)> + '_ {
        let n = self.vertices.len();
        (0..self.segment_count()).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Inserts the midpoint of every segment.
    pub fn refined(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.vertices.len());
        let n = self.vertices.len();
        for i in 0..n {
            out.push(self.vertices[i]);
            if self.closed || i + 1 < n {
                out.push(P::midpoint(&self.vertices[i], &self.vertices[(i + 1) % n]));
            }
        }
        Polyline { vertices: out, closed: self.closed }
    }

    /// Maps every vertex; the result is revalidated.
    pub fn try_map<Q: AmbientPoint>(
        &self,
        mut f: impl FnMut(usize, &P) -> Result<Q, GeometryError>,
    ) -> Result<Polyline<Q>, GeometryError> {
        let v = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, p)| f(i, p))
            .collect::<Result<Vec<_>, _>>()?;
        Polyline::new(v, self.closed)
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Polyline { vertices: v, closed: self.closed }
    }
}

/// Sum of segment lengths in the ambient metric.
pub fn curve_length<P: AmbientPoint>(c: &Polyline<P>) -> f64 {
    c.segments().map(|(a, b)| P::segment_length(&a, &b)).sum()
}

impl Curve3 {
    /// Closed planar circle `center + r(cos t · e1 + sin t · e2)` sampled at `n` points.
    pub fn circle(center: Vec3, radius: f64, e1: Vec3, e2: Vec3, n: usize) -> Result<Self, GeometryError> {
        let v = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                center + (e1 * t.cos() + e2 * t.sin()) * radius
            })
            .collect();
        Polyline::new(v, true)
    }

    /// Horizontal circle `{x² + y² = r², z = height}`.
    pub fn horizontal_circle(radius: f64, height: f64, n: usize) -> Result<Self, GeometryError> {
        Curve3::circle(Vec3::new(0.0, 0.0, height), radius, Vec3::x(), Vec3::y(), n)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }
}
