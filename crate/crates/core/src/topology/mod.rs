//! Linking numbers, winding lifts, frame separation and Hausdorff distance of polygonal curves.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    AmbientPoint, CliffordFrame, Curve3, CurveS3, GeometryError, PointS3, Polyline, Side, StereoChart, Vec3,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("curve {0} is not closed")]
    NotClosed(&'static str),
    #[error("curves come within {0:e} of each other")]
    Intersecting(f64),
    #[error("vertex {0} lies on the axis")]
    VertexOnAxis(usize),
    #[error("segment {0} crosses the axis")]
    SegmentThroughAxis(usize),
    #[error("no generic projection direction found")]
    DegenerateProjection,
    #[error("curve geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("closing radius {0} does not clear the curve")]
    BadClosingRadius(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkingMethod {
    GaussIntegral,
    CrossingCount,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkingReport {
    pub linking_number: i64,
    pub method: LinkingMethod,
    /// 1 when the Gauss sum is within 0.25 of an integer, decreasing linearly to 0 at a half-integer.
    pub confidence: f64,
    pub gauss_sum: f64,
    pub crossing_count: i64,
}

/// Seed of the generator that draws projection directions for crossing counts.
pub const PROJECTION_SEED: u64 = 0x6c69_6e6b;

const CONTACT_TOL: f64 = 1e-9;

/// Signed solid angle subtended by the quadrilateral `b0 - a0, b1 - a0, b1 - a1, b0 - a1`,
/// divided by `4π`: the exact Gauss integral over a pair of straight segments.
fn segment_pair_gauss(a0: &Vec3, a1: &Vec3, b0: &Vec3, b1: &Vec3) -> f64 {
    let r13 = b0 - a0;
    let r14 = b1 - a0;
    let r23 = b0 - a1;
    let r24 = b1 - a1;
    let unit = |v: Vec3| {
        let n = v.norm();
        if n > 0.0 {
            v / n
        } else {
            v
        }
    };
    let n1 = unit(r13.cross(&r14));
    let n2 = unit(r14.cross(&r24));
    let n3 = unit(r24.cross(&r23));
    let n4 = unit(r23.cross(&r13));
    let asin = |x: f64| x.clamp(-1.0, 1.0).asin();
    let omega = asin(n1.dot(&n2)) + asin(n2.dot(&n3)) + asin(n3.dot(&n4)) + asin(n4.dot(&n1));
    let orient = (b1 - b0).cross(&(a1 - a0)).dot(&r13);
    if orient == 0.0 {
        return 0.0;
    }
    omega.copysign(orient) / (4.0 * PI)
}

fn segment_distance(a0: &Vec3, a1: &Vec3, b0: &Vec3, b1: &Vec3) -> f64 {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let r = a0 - b0;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    (a0 + d1 * s - (b0 + d2 * t)).norm()
}

/// Smallest distance between the segments of two polylines.
pub fn min_distance(a: &Curve3, b: &Curve3) -> f64 {
    let mut best = f64::INFINITY;
    for (a0, a1) in a.segments() {
        for (b0, b1) in b.segments() {
            best = best.min(segment_distance(&a0, &a1, &b0, &b1));
        }
    }
    best
}

fn diameter_scale(a: &Curve3, b: &Curve3) -> f64 {
    let (lo_a, hi_a) = a.bounds();
    let (lo_b, hi_b) = b.bounds();
    (hi_a.sup(&hi_b) - lo_a.inf(&lo_b)).norm().max(1.0)
}

/// Sum of the exact segment-pair Gauss integrals.
pub fn gauss_sum(a: &Curve3, b: &Curve3) -> f64 {
    let mut total = 0.0;
    for (a0, a1) in a.segments() {
        for (b0, b1) in b.segments() {
            total += segment_pair_gauss(&a0, &a1, &b0, &b1);
        }
    }
    total
}

fn orthonormal_pair(d: &Vec3) -> (Vec3, Vec3) {
    let helper = if d.x.abs() < 0.6 { Vec3::x() } else { Vec3::y() };
    let e1 = d.cross(&helper).normalize();
    let e2 = d.cross(&e1);
    (e1, e2)
}

/// Signed crossings where `a` passes over `b` when viewed from direction `d`, or `None`
/// if the projection is not generic.
fn crossings_along(a: &Curve3, b: &Curve3, d: &Vec3, tol: f64) -> Option<i64> {
    let (e1, e2) = orthonormal_pair(d);
    let flat = |v: &Vec3| (v.dot(&e1), v.dot(&e2));
    let mut total = 0;
    for (a0, a1) in a.segments() {
        let (p0, p1) = (flat(&a0), flat(&a1));
        for (b0, b1) in b.segments() {
            let (q0, q1) = (flat(&b0), flat(&b1));
            let r = (p1.0 - p0.0, p1.1 - p0.1);
            let s = (q1.0 - q0.0, q1.1 - q0.1);
            let denom = r.0 * s.1 - r.1 * s.0;
            let w = (q0.0 - p0.0, q0.1 - p0.1);
            let scale = (r.0.hypot(r.1) * s.0.hypot(s.1)).max(f64::MIN_POSITIVE);
            if denom.abs() <= 1e-12 * scale {
                let offset = (w.0 * r.1 - w.1 * r.0).abs() / r.0.hypot(r.1).max(f64::MIN_POSITIVE);
                if offset <= tol {
                    return None;
                }
                continue;
            }
            let t = (w.0 * s.1 - w.1 * s.0) / denom;
            let u = (w.0 * r.1 - w.1 * r.0) / denom;
            let margin = 1e-9;
            if t < -margin || t > 1.0 + margin || u < -margin || u > 1.0 + margin {
                continue;
            }
            if t < margin || t > 1.0 - margin || u < margin || u > 1.0 - margin {
                return None;
            }
            let xa = a0 + (a1 - a0) * t;
            let xb = b0 + (b1 - b0) * u;
            let height = (xa - xb).dot(d);
            if height.abs() <= tol {
                return None;
            }
            if height > 0.0 {
                let sign = (a1 - a0).cross(&(b1 - b0)).dot(d);
                total += if sign > 0.0 { 1 } else { -1 };
            }
        }
    }
    Some(total)
}

/// Signed crossing count of `a` over `b` in a seeded generic projection.
pub fn crossing_count(a: &Curve3, b: &Curve3) -> Result<i64, TopologyError> {
    let mut rng = SplitMix64::seed_from_u64(PROJECTION_SEED);
    let tol = 1e-12 * diameter_scale(a, b);
    for _ in 0..64 {
        let v = Vec3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let n = v.norm();
        if !(0.05..=0.5).contains(&n) {
            continue;
        }
        if let Some(c) = crossings_along(a, b, &(v / n), tol) {
            return Ok(c);
        }
    }
    Err(TopologyError::DegenerateProjection)
}

/// Linking number of two closed disjoint polygons in ℝ³.
pub fn linking_number(a: &Curve3, b: &Curve3) -> Result<LinkingReport, TopologyError> {
    if !a.is_closed() {
        return Err(TopologyError::NotClosed("a"));
    }
    if !b.is_closed() {
        return Err(TopologyError::NotClosed("b"));
    }
    let gap = min_distance(a, b);
    if gap <= CONTACT_TOL * diameter_scale(a, b) {
        return Err(TopologyError::Intersecting(gap));
    }
    let sum = gauss_sum(a, b);
    let crossings = crossing_count(a, b)?;
    let nearest = sum.round();
    let dist = (sum - nearest).abs();
    let confidence = if dist <= 0.25 { 1.0 } else { (1.0 - 2.0 * dist).max(0.0) };
    let (linking_number, method) = if nearest as i64 == crossings && dist <= 0.25 {
        (crossings, LinkingMethod::GaussIntegral)
    } else {
        (crossings, LinkingMethod::CrossingCount)
    };
    Ok(LinkingReport { linking_number, method, confidence, gauss_sum: sum, crossing_count: crossings })
}

/// Closes an open polyline through a far arc: both ends are pushed radially out to radius
/// `r_close` and joined along a great circle of that sphere.
pub fn close_at_radius(c: &Curve3, r_close: f64) -> Result<Curve3, TopologyError> {
    let verts = c.vertices();
    if c.is_closed() {
        return Ok(c.clone());
    }
    let reach = verts.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(r_close > reach) {
        return Err(TopologyError::BadClosingRadius(r_close));
    }
    let first = verts[0];
    let last = verts[verts.len() - 1];
    let dir = |v: Vec3, fallback: Vec3| if v.norm() > 0.0 { v.normalize() } else { fallback };
    let start = dir(last, Vec3::z());
    let end = dir(first, -start);
    let axis = {
        let c = start.cross(&end);
        if c.norm() > 1e-9 {
            c.normalize()
        } else {
            orthonormal_pair(&start).0
        }
    };
    let mut angle = start.dot(&end).clamp(-1.0, 1.0).acos();
    if angle < 1e-9 {
        angle = TAU;
    }
    let steps = ((angle / (PI / 32.0)).ceil() as usize).max(2);
    let mut out = verts.to_vec();
    let tail = start * r_close;
    if (tail - last).norm() > 0.0 {
        out.push(tail);
    }
    let ortho = axis.cross(&start);
    for k in 1..steps {
        let t = angle * k as f64 / steps as f64;
        out.push((start * t.cos() + ortho * t.sin()) * r_close);
    }
    let head = end * r_close;
    if (head - first).norm() > 0.0 && (head - out[out.len() - 1]).norm() > 0.0 {
        out.push(head);
    }
    Curve3::new(out, true).map_err(|_| TopologyError::BadClosingRadius(r_close))
}

const POLE_CANDIDATES: usize = 24;

fn pole_candidate(k: usize) -> PointS3 {
    if k < 8 {
        let mut c = [0.0; 4];
        c[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
        PointS3::from_coords(c)
    } else {
        let bits = k - 8;
        let s = |b: usize| if bits >> b & 1 == 0 { 0.5 } else { -0.5 };
        PointS3::from_coords([s(0), s(1), s(2), s(3)])
    }
}

/// Pole, among a fixed candidate set, that stays farthest from every vertex.
pub fn chart_avoiding(curves: &[&CurveS3]) -> StereoChart {
    let mut best = (0, -1.0);
    for k in 0..POLE_CANDIDATES {
        let pole = pole_candidate(k);
        let gap = curves
            .iter()
            .flat_map(|c| c.vertices().iter())
            .map(|v| v.chordal_distance(&pole))
            .fold(f64::INFINITY, f64::min);
        if gap > best.1 {
            best = (k, gap);
        }
    }
    StereoChart::new(pole_candidate(best.0))
}

fn project_fine(c: &CurveS3, chart: &StereoChart) -> Result<Curve3, TopologyError> {
    let mut fine = c.clone();
    while fine.segments().any(|(a, b)| PointS3::segment_length(&a, &b) > 0.02) {
        fine = fine.refined();
    }
    Ok(fine.try_map(|i, p| chart.project(p).finite().ok_or(GeometryError::VertexAtInfinity(i)))?)
}

/// Linking number of two closed curves on S³, computed in a chart whose pole avoids both.
pub fn linking_number_s3(a: &CurveS3, b: &CurveS3) -> Result<LinkingReport, TopologyError> {
    let chart = chart_avoiding(&[a, b]);
    linking_number(&project_fine(a, &chart)?, &project_fine(b, &chart)?)
}

/// True iff the linking number is nonzero. A zero linking number does not prove the curves
/// are unlinked.
pub fn is_linked(a: &Curve3, b: &Curve3) -> Result<bool, TopologyError> {
    Ok(linking_number(a, b)?.linking_number != 0)
}

pub fn is_linked_s3(a: &CurveS3, b: &CurveS3) -> Result<bool, TopologyError> {
    Ok(linking_number_s3(a, b)?.linking_number != 0)
}

/// A line in ℝ³ through `point` with direction `direction`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub point: Vec3,
    pub direction: Vec3,
}

impl Line {
    pub fn z_axis() -> Self {
        Line { point: Vec3::zeros(), direction: Vec3::z() }
    }
}

/// Continuous angle of the curve around `axis`, sampled at the vertices; closed curves get
/// one extra sample for the return to the first vertex.
pub fn winding_lift(c: &Curve3, axis: &Line) -> Result<Vec<f64>, TopologyError> {
    let d = axis.direction.normalize();
    let (e1, e2) = orthonormal_pair(&d);
    let scale = c.vertices().iter().map(|v| (v - axis.point).norm()).fold(1.0, f64::max);
    let mut angles = Vec::with_capacity(c.len() + 1);
    let mut ring: Vec<Vec3> = c.vertices().to_vec();
    if c.is_closed() {
        ring.push(ring[0]);
    }
    let mut prev: Option<f64> = None;
    for (i, v) in ring.iter().enumerate() {
        let r = v - axis.point;
        let (x, y) = (r.dot(&e1), r.dot(&e2));
        if x.hypot(y) <= 1e-12 * scale {
            return Err(TopologyError::VertexOnAxis(i % c.len()));
        }
        let raw = y.atan2(x);
        let theta = match prev {
            None => raw,
            Some(p) => {
                let mut step = (raw - p).rem_euclid(TAU);
                if step > PI {
                    step -= TAU;
                }
                if (step.abs() - PI).abs() <= 1e-12 {
                    return Err(TopologyError::SegmentThroughAxis(i - 1));
                }
                p + step
            }
        };
        angles.push(theta);
        prev = Some(theta);
    }
    Ok(angles)
}

/// Outcome of testing two curves against the sides of a Clifford frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameSeparation {
    pub separated: bool,
    /// Some vertex lies within `1e-9` of `ψ(𝕋)`.
    pub boundary_contact: bool,
    /// Side of `c0` when separated.
    pub side_of_c0: Option<Side>,
    /// Smallest `| |z1|² − 1/2 |` over all vertices.
    pub margin: f64,
}

pub fn frame_separation(c0: &CurveS3, c1: &CurveS3, f: &CliffordFrame) -> FrameSeparation {
    let values = |c: &CurveS3| c.vertices().iter().map(|p| f.side_value(p)).collect::<Vec<_>>();
    let v0 = values(c0);
    let v1 = values(c1);
    let margin = v0.iter().chain(&v1).map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let boundary_contact = margin <= CONTACT_TOL;
    let all = |v: &[f64], neg: bool| v.iter().all(|&x| if neg { x < 0.0 } else { x > 0.0 });
    let side_of_c0 = if boundary_contact {
        None
    } else if all(&v0, true) && all(&v1, false) {
        Some(Side::Zero)
    } else if all(&v0, false) && all(&v1, true) {
        Some(Side::One)
    } else {
        None
    };
    FrameSeparation { separated: side_of_c0.is_some(), boundary_contact, side_of_c0, margin }
}

pub fn separated_by_frame(c0: &CurveS3, c1: &CurveS3, f: &CliffordFrame) -> bool {
    frame_separation(c0, c1, f).separated
}

fn point_segment_distance<P: Embedded>(x: &P::V, a: &P::V, b: &P::V) -> f64 {
    P::point_segment(x, a, b)
}

/// Ambient spaces where segments are straight in a flat embedding.
pub trait Embedded: AmbientPoint {
    type V: Copy;
    fn flat(&self) -> Self::V;
    fn lerp(a: &Self::V, b: &Self::V, t: f64) -> Self::V;
    fn dist(a: &Self::V, b: &Self::V) -> f64;
    fn point_segment(x: &Self::V, a: &Self::V, b: &Self::V) -> f64;
}

impl Embedded for Vec3 {
    type V = Vec3;

    fn flat(&self) -> Vec3 {
        *self
    }

    fn lerp(a: &Vec3, b: &Vec3, t: f64) -> Vec3 {
        a + (b - a) * t
    }

    fn dist(a: &Vec3, b: &Vec3) -> f64 {
        (a - b).norm()
    }

    fn point_segment(x: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
        let d = b - a;
        let len2 = d.norm_squared();
        let t = if len2 > 0.0 { ((x - a).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
        (x - (a + d * t)).norm()
    }
}

/// Curves on S³ are measured in the chordal metric of ℝ⁴ with chord segments.
impl Embedded for PointS3 {
    type V = [f64; 4];

    fn flat(&self) -> [f64; 4] {
        self.coords()
    }

    fn lerp(a: &[f64; 4], b: &[f64; 4], t: f64) -> [f64; 4] {
        std::array::from_fn(|i| a[i] + (b[i] - a[i]) * t)
    }

    fn dist(a: &[f64; 4], b: &[f64; 4]) -> f64 {
        (0..4).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
    }

    fn point_segment(x: &[f64; 4], a: &[f64; 4], b: &[f64; 4]) -> f64 {
        let d: [f64; 4] = std::array::from_fn(|i| b[i] - a[i]);
        let len2: f64 = d.iter().map(|v| v * v).sum();
        let proj: f64 = (0..4).map(|i| (x[i] - a[i]) * d[i]).sum();
        let t = if len2 > 0.0 { (proj / len2).clamp(0.0, 1.0) } else { 0.0 };
        Self::dist(x, &Self::lerp(a, b, t))
    }
}

fn segments_of<P: Embedded>(c: &Polyline<P>) -> Vec<(P::V, P::V)> {
    c.segments().map(|(a, b)| (a.flat(), b.flat())).collect()
}

/// `sup_{x∈a} dist(x, b)` by branch and bound over the segments of `a`. On a piece `[p, q]`
/// the distance to any single segment of `b` is convex, so `min_j max(d_j(p), d_j(q))`
/// bounds the distance to `b` from above.
fn directed_hausdorff<P: Embedded>(a: &[(P::V, P::V)], b: &[(P::V, P::V)], tol: f64) -> f64 {
    let mut best = 0.0f64;
    let mut stack: Vec<(P::V, P::V)> = a.to_vec();
    while let Some((p, q)) = stack.pop() {
        let mut fp = f64::INFINITY;
        let mut fq = f64::INFINITY;
        let mut bound = f64::INFINITY;
        for (s0, s1) in b {
            let dp = point_segment_distance::<P>(&p, s0, s1);
            let dq = point_segment_distance::<P>(&q, s0, s1);
            fp = fp.min(dp);
            fq = fq.min(dq);
            bound = bound.min(dp.max(dq));
        }
        best = best.max(fp).max(fq);
        if bound <= best + tol || P::dist(&p, &q) <= tol {
            continue;
        }
        let m = P::lerp(&p, &q, 0.5);
        stack.push((p, m));
        stack.push((m, q));
    }
    best
}

/// Symmetric Hausdorff distance between the point sets traced by two polylines, accurate
/// to `1e-12` of their extent.
pub fn hausdorff_distance<P: Embedded>(a: &Polyline<P>, b: &Polyline<P>) -> f64 {
    let sa = segments_of(a);
    let sb = segments_of(b);
    let extent = sa.iter().chain(&sb).map(|(p, q)| P::dist(p, q)).fold(0.0, f64::max).max(1.0);
    let tol = 1e-12 * extent;
    directed_hausdorff::<P>(&sa, &sb, tol).max(directed_hausdorff::<P>(&sb, &sa, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_hopf_link;

    /// Midpoint-rule double integral of the Gauss form over the polygons.
    fn gauss_oracle(a: &Curve3, b: &Curve3, sub: usize) -> f64 {
        let mut total = 0.0;
        for (a0, a1) in a.segments() {
            for (b0, b1) in b.segments() {
                let da = (a1 - a0) / sub as f64;
                let db = (b1 - b0) / sub as f64;
                for i in 0..sub {
                    let xa = a0 + da * (i as f64 + 0.5);
                    for j in 0..sub {
                        let xb = b0 + db * (j as f64 + 0.5);
                        let r = xa - xb;
                        total += r.dot(&da.cross(&db)) / r.norm().powi(3);
                    }
                }
            }
        }
        total / (4.0 * PI)
    }

    fn circle(center: Vec3, radius: f64, e1: Vec3, e2: Vec3) -> Curve3 {
        Curve3::circle(center, radius, e1, e2, 64).unwrap()
    }

    fn stereo_hopf() -> (Curve3, Curve3) {
        let axis = Curve3::new((0..=40).map(|k| Vec3::new(0.0, 0.0, -20.0 + k as f64)).collect(), false).unwrap();
        let axis = close_at_radius(&axis, 1e3).unwrap();
        (axis, circle(Vec3::zeros(), 1.0, Vec3::x(), Vec3::y()))
    }

    #[test]
    fn hopf_pair_links_once() {
        let (a, b) = stereo_hopf();
        let rep = linking_number(&a, &b).unwrap();
        assert_eq!(rep.linking_number.abs(), 1);
        assert_eq!(rep.method, LinkingMethod::GaussIntegral);
        assert_eq!(rep.confidence, 1.0);
        assert!(is_linked(&a, &b).unwrap());
    }

    #[test]
    fn sign_convention_matches_gauss_form() {
        let a = circle(Vec3::zeros(), 1.0, Vec3::x(), Vec3::y());
        let b = circle(Vec3::new(1.0, 0.0, 0.0), 1.0, Vec3::x(), Vec3::z());
        let oracle = gauss_oracle(&a, &b, 6);
        let rep = linking_number(&a, &b).unwrap();
        assert!((rep.gauss_sum - oracle).abs() < 1e-2, "{} vs {}", rep.gauss_sum, oracle);
        assert_eq!(rep.linking_number as f64, oracle.round());
        assert_eq!(rep.crossing_count as f64, oracle.round());
        let rev = linking_number(&a, &b.reversed()).unwrap();
        assert_eq!(rev.linking_number, -rep.linking_number);
    }

    #[test]
    fn far_apart_circles_do_not_link() {
        let a = circle(Vec3::zeros(), 1.0, Vec3::x(), Vec3::y());
        let b = circle(Vec3::new(0.0, 0.0, 5.0), 1.0, Vec3::x(), Vec3::y());
        let rep = linking_number(&a, &b).unwrap();
        assert_eq!(rep.linking_number, 0);
        assert!(!is_linked(&a, &b).unwrap());
    }

    #[test]
    fn doubled_winding_links_twice() {
        // (2,1) torus curve: twice around the core circle of radius 2, once through the tube.
        let n = 400;
        let pts = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                let (phi, psi) = (t, 2.0 * t);
                let r = 2.0 + 0.5 * psi.cos();
                Vec3::new(r * phi.cos(), r * phi.sin(), 0.5 * psi.sin())
            })
            .collect();
        let c = Curve3::new(pts, true).unwrap();
        let core = circle(Vec3::zeros(), 2.0, Vec3::x(), Vec3::y());
        let rep = linking_number(&c, &core).unwrap();
        assert_eq!(rep.linking_number.abs(), 2);
        assert_eq!(rep.linking_number as f64, gauss_oracle(&c, &core, 2).round());
    }

    #[test]
    fn touching_or_open_curves_are_rejected() {
        let a = circle(Vec3::zeros(), 1.0, Vec3::x(), Vec3::y());
        let b = circle(Vec3::new(2.0, 0.0, 0.0), 1.0, Vec3::x(), Vec3::y());
        assert!(matches!(linking_number(&a, &b), Err(TopologyError::Intersecting(_))));
        let open = Curve3::new(vec![Vec3::zeros(), Vec3::x()], false).unwrap();
        assert_eq!(linking_number(&open, &a), Err(TopologyError::NotClosed("a")));
    }

    #[test]
    fn hopf_link_on_the_sphere() {
        let (h0, h1) = sample_hopf_link(64).unwrap();
        assert_eq!(linking_number_s3(&h0, &h1).unwrap().linking_number.abs(), 1);
        let swapped = crate::geometry::apply_mobius(&crate::geometry::clifford_swap(), &h0).unwrap();
        assert!(is_linked_s3(&h0, &swapped).unwrap());
    }

    #[test]
    fn winding_examples() {
        let c = circle(Vec3::zeros(), 1.0, Vec3::x(), Vec3::y());
        let lift = winding_lift(&c, &Line::z_axis()).unwrap();
        assert!(((lift[lift.len() - 1] - lift[0]).abs() - TAU).abs() < 1e-12);
        let wedge = circle(Vec3::new(3.0, 0.0, 0.0), 1.0, Vec3::x(), Vec3::z());
        let lift = winding_lift(&wedge, &Line::z_axis()).unwrap();
        assert!((lift[lift.len() - 1] - lift[0]).abs() < 1e-12);
        let half = Curve3::new((0..=32).map(|k| {
            let t = PI * k as f64 / 32.0;
            Vec3::new(t.cos(), t.sin(), 0.0)
        }).collect(), false).unwrap();
        let lift = winding_lift(&half, &Line::z_axis()).unwrap();
        assert!(((lift[lift.len() - 1] - lift[0]).abs() - PI).abs() < 1e-12);
        let through = Curve3::new(vec![Vec3::new(0.0, 0.0, 1.0), Vec3::x()], false).unwrap();
        assert_eq!(winding_lift(&through, &Line::z_axis()), Err(TopologyError::VertexOnAxis(0)));
    }

    #[test]
    fn frame_separation_examples() {
        let (h0, h1) = sample_hopf_link(64).unwrap();
        let f = CliffordFrame::identity();
        assert!(separated_by_frame(&h1, &h0, &f));
        assert!(!separated_by_frame(&h0, &h0, &f));
        let shaken = |c: &CurveS3, s: f64| {
            let v = c
                .vertices()
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let mut x = p.coords();
                    x[k % 4] += if k % 2 == 0 { s } else { -s };
                    PointS3::from_coords(x).normalized()
                })
                .collect();
            CurveS3::new(v, true).unwrap()
        };
        let (s0, s1) = (shaken(&h0, 0.05), shaken(&h1, 0.05));
        let sep = frame_separation(&s1, &s0, &f);
        assert!(sep.separated);
        for p in s0.vertices() {
            assert_eq!(f.side(p, 1e-9), Some(Side::One));
        }
        let on = CurveS3::new(
            (0..8).map(|k| crate::geometry::hopf_to_point(crate::geometry::HopfCoords::new(PI / 4.0, TAU * k as f64 / 8.0, 0.0))).collect(),
            true,
        )
        .unwrap();
        let contact = frame_separation(&on, &h0, &f);
        assert!(!contact.separated && contact.boundary_contact);
    }

    fn brute_hausdorff(a: &Curve3, b: &Curve3, n: usize) -> f64 {
        let sample = |c: &Curve3| -> Vec<Vec3> {
            c.segments().flat_map(|(p, q)| (0..n).map(move |k| p + (q - p) * (k as f64 / n as f64))).collect()
        };
        let (pa, pb) = (sample(a), sample(b));
        let dir = |x: &[Vec3], y: &[Vec3]| {
            x.iter().map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        dir(&pa, &pb).max(dir(&pb, &pa))
    }

    #[test]
    fn hausdorff_examples() {
        let c = circle(Vec3::zeros(), 1.0, Vec3::x(), Vec3::y());
        assert_eq!(hausdorff_distance(&c, &c), 0.0);
        let n = 4096;
        let big = Curve3::circle(Vec3::zeros(), 1.3, Vec3::x(), Vec3::y(), n).unwrap();
        let small = Curve3::circle(Vec3::zeros(), 1.0, Vec3::x(), Vec3::y(), n).unwrap();
        assert!((hausdorff_distance(&big, &small) - 0.3).abs() < 1e-6);
        let square = |rot: f64| {
            Curve3::new(
                (0..4).map(|k| {
                    let t = rot + PI / 2.0 * k as f64;
                    Vec3::new(t.cos(), t.sin(), 0.0)
                }).collect(),
                true,
            )
            .unwrap()
        };
        let (a, b) = (square(0.0), square(PI / 4.0));
        let exact = hausdorff_distance(&a, &b);
        let brute = brute_hausdorff(&a, &b, 2000);
        assert!((exact - brute).abs() < 1e-3, "{exact} vs {brute}");
        assert!(exact >= brute - 1e-12);
    }
}
