//! Seeded samplers. Every stream is a SplitMix64 generator (Steele, Lea and Flood 2014:
//! `state += 0x9E3779B97F4A7C15`, then the `mix64` finalizer), seeded with
//! `seed + case · 0x9E3779B97F4A7C15 + salt` so that each case has its own stream.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use nalgebra::{Rotation3, Unit};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::graph::WeightedGraph;
use crate::geometry::{
    apply_mobius, hopf_to_point, CliffordFrame, CurveS3, HopfCoords, MobiusMap, MobiusPrimitive, Polyline, Side, Vec3,
};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Generator for case `case` of a run seeded with `seed`; `salt` separates uses.
pub fn case_rng(seed: u64, case: u64, salt: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed.wrapping_add(case.wrapping_mul(GOLDEN)).wrapping_add(salt))
}

/// Shape of the curves drawn by [`random_linked_curve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkedCurveShape {
    pub vertices: usize,
    /// Scales every noise amplitude; 0 gives a circle parallel to the core.
    pub noise: f64,
    /// Range of the mean angular distance `ε` from the core.
    pub offset: (f64, f64),
}

impl Default for LinkedCurveShape {
    fn default() -> Self {
        LinkedCurveShape { vertices: 128, noise: 1.0, offset: (0.2, 0.4) }
    }
}

/// A closed curve in the solid torus on `side` of `frame`, homotopic there to the core.
///
/// For side zero the curve is `η = π/2 − ε(s)`, `ξ1 = α(s)`, `ξ2 = s` in Hopf
/// coordinates; for side one the roles of `ξ1` and `ξ2` swap and `η = ε(s)`. Both `ε` and
/// `α` are a constant plus three seeded Fourier modes. `ε` stays in
/// `[0.05, π/4 − 0.1]`, so the curve never meets the torus or the core of the other side,
/// and it links the opposite core once.
pub fn random_linked_curve(seed: u64, frame: &CliffordFrame, side: Side) -> CurveS3 {
    random_linked_curve_with(seed, frame, side, &LinkedCurveShape::default())
}

pub fn random_linked_curve_with(seed: u64, frame: &CliffordFrame, side: Side, shape: &LinkedCurveShape) -> CurveS3 {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let eps0 = shape.offset.0 + (shape.offset.1 - shape.offset.0) * rng.random::<f64>();
    let alpha0 = TAU * rng.random::<f64>();
    let modes: Vec<(f64, f64, f64, f64)> = (1..=3)
        .map(|m| {
            let m = m as f64;
            (0.06 / m * (2.0 * rng.random::<f64>() - 1.0), TAU * rng.random::<f64>(), 0.6 / m * (2.0 * rng.random::<f64>() - 1.0), TAU * rng.random::<f64>())
        })
        .collect();
    let n = shape.vertices;
    let pts = (0..n)
        .map(|k| {
            let s = TAU * k as f64 / n as f64;
            let (mut eps, mut alpha) = (eps0, alpha0);
            for (m, &(a, pa, b, pb)) in modes.iter().enumerate() {
                let f = (m + 1) as f64;
                eps += shape.noise * a * (f * s + pa).cos();
                alpha += shape.noise * b * (f * s + pb).sin();
            }
            let eps = eps.clamp(0.05, FRAC_PI_4 - 0.1);
            let c = match side {
                Side::Zero => HopfCoords { eta: PI / 2.0 - eps, xi1: alpha, xi2: s },
                Side::One => HopfCoords { eta: eps, xi1: s, xi2: alpha },
            };
            hopf_to_point(c)
        })
        .collect();
    let curve = Polyline::new(pts, true).expect("distinct samples");
    apply_mobius(frame.psi(), &curve).expect("Möbius images of S³ points are finite")
}

/// A conformal Clifford torus: a random similarity of the default chart with scale in
/// `[0.8, 1.25]` and translation of length at most `0.3`.
pub fn random_frame(rng: &mut SplitMix64) -> CliffordFrame {
    let axis = loop {
        let v = Vec3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        if v.norm() > 0.05 {
            break v;
        }
    };
    let rotation = Rotation3::from_axis_angle(&Unit::new_normalize(axis), TAU * rng.random::<f64>());
    let scale = (0.8f64.ln() + (1.25f64 / 0.8).ln() * rng.random::<f64>()).exp();
    let dir = Vec3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    let translation = if dir.norm() > 0.0 { dir.normalize() * 0.3 * rng.random::<f64>() } else { Vec3::zeros() };
    CliffordFrame::new(MobiusMap::from_primitives(vec![MobiusPrimitive::Similarity { scale, rotation, translation }]))
}

/// A connected multigraph with `4..=max_vertices` vertices: a random spanning tree plus up
/// to as many extra edges as vertices, lengths in `[0.5, 2]`, unit areas. Returns the graph
/// and disjoint terminal sets of one or two vertices each.
pub fn random_graph(rng: &mut SplitMix64, max_vertices: usize) -> (WeightedGraph, Vec<usize>, Vec<usize>) {
    let n = rng.random_range(4..=max_vertices.max(4));
    let mut g = WeightedGraph::new(n);
    let length = |rng: &mut SplitMix64| 0.5 + 1.5 * rng.random::<f64>();
    for v in 1..n {
        let u = rng.random_range(0..v);
        let s = length(rng);
        g.add_edge(u, v, s).expect("tree edge");
    }
    for _ in 0..rng.random_range(0..=n) {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            let s = length(rng);
            g.add_edge(u, v, s).expect("distinct endpoints");
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let (ks, kt) = (rng.random_range(1..=2), rng.random_range(1..=2));
    let mut s = order[..ks].to_vec();
    let mut t = order[ks..ks + kt].to_vec();
    s.sort_unstable();
    t.sort_unstable();
    (g, s, t)
}

