//! Reflection and dihedral symmetrization of curves about the `z`-axis, even reflection of
//! cell densities, and the coaxial circle that ends the symmetrization chain.

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Curve3, GeometryError, Vec3};
use crate::pde::CellDensity;
use crate::topology::{winding_lift, Line, TopologyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetrizationError {
    #[error("the curve must be closed")]
    NotClosed,
    #[error("vertex {0} lies on the axis")]
    OnAxis(usize),
    #[error("the curve lies in one closed half-space")]
    OneSided,
    #[error("the curve misses the wedge")]
    WedgeMissed,
    #[error("k must be positive")]
    BadOrder,
    #[error("grid is not symmetric under the reflection")]
    GridNotAligned,
    #[error("density has {got} cells, grid has {expected}")]
    DensityLength { got: usize, expected: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// A plane `H` through the `z`-axis with a chosen side `U⁺`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HalfspaceFrame {
    /// `H` contains the direction `(cos θ, sin θ, 0)`.
    pub angle: f64,
    /// `U⁺ = {n·x > 0}` with `n = (−sin θ, cos θ, 0)`, or `{n·x < 0}` when flipped.
    pub flipped: bool,
}

impl HalfspaceFrame {
    pub fn new(angle: f64) -> Self {
        HalfspaceFrame { angle, flipped: false }
    }

    /// Unit normal pointing into `U⁺`.
    pub fn normal(&self) -> Vec3 {
        let n = Vec3::new(-self.angle.sin(), self.angle.cos(), 0.0);
        if self.flipped {
            -n
        } else {
            n
        }
    }

    pub fn reflect(&self, x: &Vec3) -> Vec3 {
        let n = self.normal();
        x - n * (2.0 * n.dot(x))
    }

    /// The dihedral frame of order 1, whose wedge is `U⁺`.
    fn as_dihedral(&self) -> DihedralFrame {
        let start = if self.flipped { self.angle + PI } else { self.angle };
        DihedralFrame { angle: start, k: 1 }
    }
}

/// Planes `H_{jπ/k}` through the `z`-axis at azimuths `angle + jπ/k`. The base wedge is the
/// set of azimuths in `(angle, angle + π/k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DihedralFrame {
    pub angle: f64,
    pub k: usize,
}

impl DihedralFrame {
    pub fn new(angle: f64, k: usize) -> Result<Self, SymmetrizationError> {
        if k == 0 {
            return Err(SymmetrizationError::BadOrder);
        }
        Ok(DihedralFrame { angle, k })
    }

    fn step(&self) -> f64 {
        PI / self.k as f64
    }

    /// Reflection in the plane at azimuth `a`.
    fn reflect_at(a: f64, x: &Vec3) -> Vec3 {
        let n = Vec3::new(-a.sin(), a.cos(), 0.0);
        x - n * (2.0 * n.dot(x))
    }

    /// The map taking the base wedge onto wedge `w`: `R_{wπ/k} ∘ … ∘ R_{π/k}`.
    fn wedge_map(&self, w: usize, x: &Vec3) -> Vec3 {
        let mut y = *x;
        for j in 1..=w {
            y = Self::reflect_at(self.angle + j as f64 * self.step(), &y);
        }
        y
    }

    /// Reflections in all `k` planes of the frame.
    pub fn reflections(&self) -> Vec<Box<dyn Fn(&Vec3) -> Vec3>> {
        (0..self.k)
            .map(|j| {
                let a = self.angle + j as f64 * self.step();
                Box::new(move |x: &Vec3| Self::reflect_at(a, x)) as Box<dyn Fn(&Vec3) -> Vec3>
            })
            .collect()
    }
}

/// Output of a symmetrization: closed components and the number of vertices nudged off a
/// boundary plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Symmetrized {
    pub components: Vec<Curve3>,
    pub perturbed_vertices: usize,
}

const TANGENCY_TOL: f64 = 1e-12;
const NUDGE: f64 = 1e-9;

/// Signed distances to the two faces, positive inside the base wedge. For `k = 1` both
/// faces are halves of one plane and a single half-space constraint describes the wedge.
fn face_normals(f: &DihedralFrame) -> Vec<Vec3> {
    let a = f.angle;
    let lower = Vec3::new(-a.sin(), a.cos(), 0.0);
    if f.k == 1 {
        return vec![lower];
    }
    let b = a + f.step();
    let upper = Vec3::new(b.sin(), -b.cos(), 0.0);
    vec![lower, upper]
}

/// Face hit by a boundary point: 0 for the plane at `angle`, 1 for the plane at `angle + π/k`.
/// For `k = 1` the two faces are the two half-planes of `H`.
fn face_of(f: &DihedralFrame, constraint: usize, x: &Vec3) -> usize {
    if f.k == 1 {
        let dir = Vec3::new(f.angle.cos(), f.angle.sin(), 0.0);
        if dir.dot(x) >= 0.0 {
            0
        } else {
            1
        }
    } else {
        constraint
    }
}

struct Arc {
    points: Vec<Vec3>,
    faces: [usize; 2],
}

fn check_curve(c: &Curve3) -> Result<(), SymmetrizationError> {
    if !c.is_closed() {
        return Err(SymmetrizationError::NotClosed);
    }
    let scale = c.vertices().iter().map(|v| v.norm()).fold(1.0, f64::max);
    for (i, v) in c.vertices().iter().enumerate() {
        if v.x.hypot(v.y) <= TANGENCY_TOL * scale {
            return Err(SymmetrizationError::OnAxis(i));
        }
    }
    Ok(())
}

/// Pieces of `c` inside the closed base wedge, each running from one face to another, or
/// the whole curve when it never leaves the open wedge.
fn clip(c: &Curve3, f: &DihedralFrame) -> (Result<Vec<Arc>, Vec<Vec3>>, usize) {
    let normals = face_normals(f);
    let mut perturbed = 0;
    let verts: Vec<Vec3> = c
        .vertices()
        .iter()
        .map(|v| {
            let mut v = *v;
            for n in &normals {
                if n.dot(&v).abs() <= TANGENCY_TOL {
                    v += n * NUDGE;
                    perturbed += 1;
                }
            }
            v
        })
        .collect();
    let inside = |v: &Vec3| normals.iter().all(|n| n.dot(v) > 0.0);
    let n = verts.len();
    let Some(start) = (0..n).find(|&i| !inside(&verts[i])) else {
        return (Err(verts), perturbed);
    };
    let mut arcs = Vec::new();
    let mut current: Option<Arc> = None;
    for step in 0..n {
        let p = verts[(start + step) % n];
        let q = verts[(start + step + 1) % n];
        let d = q - p;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        let (mut f0, mut f1) = (usize::MAX, usize::MAX);
        let mut empty = false;
        for (ci, nrm) in normals.iter().enumerate() {
            let a = nrm.dot(&p);
            let b = nrm.dot(&d);
            if b == 0.0 {
                if a <= 0.0 {
                    empty = true;
                }
                continue;
            }
            let t = -a / b;
            if b > 0.0 {
                if t > t0 {
                    t0 = t;
                    f0 = ci;
                }
            } else if t < t1 {
                t1 = t;
                f1 = ci;
            }
        }
        if empty || t0 >= t1 {
            continue;
        }
        if f0 != usize::MAX {
            let x = p + d * t0;
            current = Some(Arc { points: vec![x], faces: [face_of(f, f0, &x), usize::MAX] });
        }
        if let Some(arc) = current.as_mut() {
            if f1 == usize::MAX {
                arc.points.push(q);
            } else {
                let x = p + d * t1;
                arc.points.push(x);
                arc.faces[1] = face_of(f, f1, &x);
                arcs.push(current.take().unwrap());
            }
        }
    }
    (Ok(arcs), perturbed)
}

/// Glues the `2k` images of each arc along the faces into closed curves.
fn assemble(arcs: &[Arc], f: &DihedralFrame) -> Result<Vec<Curve3>, SymmetrizationError> {
    let wedges = 2 * f.k;
    let mut out = Vec::new();
    let mut used = vec![vec![false; wedges]; arcs.len()];
    for (i, arc) in arcs.iter().enumerate() {
        for w0 in 0..wedges {
            if used[i][w0] {
                continue;
            }
            let mut pts: Vec<Vec3> = Vec::new();
            let (mut w, mut forward) = (w0, true);
            loop {
                used[i][w] = true;
                let image: Vec<Vec3> = arc.points.iter().map(|x| f.wedge_map(w, x)).collect();
                let seq: Box<dyn Iterator<Item = &Vec3>> =
                    if forward { Box::new(image.iter()) } else { Box::new(image.iter().rev()) };
                pts.extend(seq.take(image.len() - 1));
                let end_face = arc.faces[if forward { 1 } else { 0 }];
                let face_here = if w % 2 == 0 { end_face } else { 1 - end_face };
                w = if face_here == 1 { (w + 1) % wedges } else { (w + wedges - 1) % wedges };
                forward = !forward;
                if w == w0 && forward {
                    break;
                }
            }
            out.push(Curve3::new(pts, true)?);
        }
    }
    Ok(out)
}

fn symmetrize(c: &Curve3, f: &DihedralFrame, one_sided_error: bool) -> Result<Symmetrized, SymmetrizationError> {
    check_curve(c)?;
    let (pieces, perturbed_vertices) = clip(c, f);
    let components = match pieces {
        Ok(arcs) if arcs.is_empty() => {
            return Err(if one_sided_error { SymmetrizationError::OneSided } else { SymmetrizationError::WedgeMissed })
        }
        Ok(arcs) => assemble(&arcs, f)?,
        Err(_) if one_sided_error => return Err(SymmetrizationError::OneSided),
        Err(verts) => (0..2 * f.k)
            .map(|w| Curve3::new(verts.iter().map(|x| f.wedge_map(w, x)).collect(), true))
            .collect::<Result<_, _>>()?,
    };
    Ok(Symmetrized { components, perturbed_vertices })
}

/// `(c ∩ Ū⁺) ∪ R_H(c ∩ Ū⁺)`, split into closed curves: each arc of `c` inside `Ū⁺`
/// closes up with its mirror image.
pub fn reflect_half(c: &Curve3, f: &HalfspaceFrame) -> Result<Symmetrized, SymmetrizationError> {
    symmetrize(c, &f.as_dihedral(), true)
}

/// `Ẽ ∪ R_π(Ẽ)` with `Ẽ` the successive reflections of `c ∩ U⁺` across `H_{π/k}, …,
/// H_{(k−1)π/k}`: the orbit of the wedge piece under the dihedral group of order `2k`.
pub fn dihedral_symmetrize(c: &Curve3, f: &DihedralFrame) -> Result<Symmetrized, SymmetrizationError> {
    if f.k == 0 {
        return Err(SymmetrizationError::BadOrder);
    }
    symmetrize(c, f, false)
}

/// Linking number of a closed curve with the `z`-axis closed through infinity: the
/// winding number of its shadow in the `xy`-plane.
pub fn axis_linking(c: &Curve3) -> Result<i64, SymmetrizationError> {
    let lift = winding_lift(c, &Line::z_axis())?;
    Ok(((lift[lift.len() - 1] - lift[0]) / TAU).round() as i64)
}

fn diameter(c: &Curve3) -> f64 {
    let v = c.vertices();
    let mut best = 0.0f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.max((v[i] - v[j]).norm());
        }
    }
    best
}

/// The component linked with the axis that has the largest diameter.
pub fn select_component(components: &[Curve3]) -> Option<&Curve3> {
    components
        .iter()
        .filter(|c| axis_linking(c).is_ok_and(|l| l != 0))
        .max_by(|a, b| diameter(a).total_cmp(&diameter(b)))
}

/// Coaxial circle through the first vertex of `c`, sampled at `n` points starting there.
pub fn axisymmetric_surrogate(c: &Curve3, n: usize) -> Result<Curve3, SymmetrizationError> {
    let v = c.vertices()[0];
    let r = v.x.hypot(v.y);
    if r <= TANGENCY_TOL * v.norm().max(1.0) {
        return Err(SymmetrizationError::OnAxis(0));
    }
    let phi = v.y.atan2(v.x);
    let pts: Vec<Vec3> = (0..n)
        .map(|k| {
            if k == 0 {
                return v;
            }
            let t = phi + TAU * k as f64 / n as f64;
            Vec3::new(r * t.cos(), r * t.sin(), v.z)
        })
        .collect();
    Ok(Curve3::new(pts, true)?)
}

/// `Σ ρ^p h³` over the cells of each of the `2k` wedges of the frame, wedge `w` covering
/// azimuths `(angle + wπ/k, angle + (w+1)π/k)`. Cells centred on a plane of the frame or on
/// the axis are left out.
pub fn wedge_energies(rho: &CellDensity, f: &DihedralFrame, p: f64) -> Vec<f64> {
    let wedges = 2 * f.k;
    let step = f.step();
    let tol = 1e-9 * rho.h;
    let mut out = vec![0.0; wedges];
    for (c, v) in rho.values.iter().enumerate() {
        let x = rho.center(c);
        let r = x.x.hypot(x.y);
        if r <= tol {
            continue;
        }
        let a = (x.y.atan2(x.x) - f.angle).rem_euclid(TAU);
        let s = a / step;
        let w = s.floor();
        if (s - w) * step * r <= tol || (w + 1.0 - s) * step * r <= tol {
            continue;
        }
        out[(w as usize).min(wedges - 1)] += v.abs().powf(p);
    }
    out.iter().map(|e| e * rho.h.powi(3)).collect()
}

/// The frame whose base wedge carries the least energy.
pub fn lightest_wedge(rho: &CellDensity, f: &DihedralFrame, p: f64) -> (DihedralFrame, Vec<f64>) {
    let e = wedge_energies(rho, f, p);
    let w = (0..e.len()).min_by(|&a, &b| e[a].total_cmp(&e[b])).unwrap();
    (DihedralFrame { angle: f.angle + w as f64 * f.step(), k: f.k }, e)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvenReflection {
    /// `Σ_{U⁺} ρ^p h³` for the chosen side.
    pub energy_kept: f64,
    /// `Σ_{U⁻} ρ^p h³` for the discarded side.
    pub energy_dropped: f64,
    /// Energy of cells whose centres lie on `H`.
    pub energy_on_plane: f64,
    pub energy_before: f64,
    pub energy_after: f64,
    /// Whether the flagged side of the frame was kept.
    pub kept_flagged_side: bool,
}

/// Even reflection of `rho` across `H`, keeping the side with the smaller energy (ties keep
/// the frame's own `U⁺`). Sums run over mirror pairs in a fixed order, so
/// `energy_after = 2·energy_kept + energy_on_plane ≤ energy_before` holds exactly in floating point.
pub fn even_reflect_density(
    rho: &CellDensity,
    f: &HalfspaceFrame,
    p: f64,
) -> Result<(CellDensity, EvenReflection), SymmetrizationError> {
    if rho.values.len() != rho.len() {
        return Err(SymmetrizationError::DensityLength { got: rho.values.len(), expected: rho.len() });
    }
    let n = f.normal();
    let scale = rho.h * 1e-9;
    let mut plus = Vec::new();
    let mut on_plane = Vec::new();
    let mut mirror = vec![usize::MAX; rho.len()];
    for c in 0..rho.len() {
        let x = rho.center(c);
        let m = rho.locate(&f.reflect(&x)).ok_or(SymmetrizationError::GridNotAligned)?;
        mirror[c] = m;
        let side = n.dot(&x);
        if side.abs() <= scale {
            on_plane.push(c);
        } else if side > 0.0 {
            plus.push(c);
        }
    }
    let vol = rho.h.powi(3);
    let cell = |c: usize| rho.values[c].abs().powf(p);
    let e_plus = plus.iter().map(|&c| cell(c)).sum::<f64>() * vol;
    let e_minus = plus.iter().map(|&c| cell(mirror[c])).sum::<f64>() * vol;
    let e_plane = on_plane.iter().map(|&c| cell(c)).sum::<f64>() * vol;
    let keep_flagged = e_plus <= e_minus;
    let mut out = rho.clone();
    for &c in &plus {
        let (keep, drop) = if keep_flagged { (c, mirror[c]) } else { (mirror[c], c) };
        out.values[drop] = rho.values[keep];
    }
    let (kept, dropped) = if keep_flagged { (e_plus, e_minus) } else { (e_minus, e_plus) };
    let report = EvenReflection {
        energy_kept: kept,
        energy_dropped: dropped,
        energy_on_plane: e_plane,
        energy_before: (e_plus + e_minus) + e_plane,
        energy_after: (kept + kept) + e_plane,
        kept_flagged_side: keep_flagged,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{close_at_radius, hausdorff_distance, linking_number};

    fn coaxial(r: f64, z: f64, n: usize) -> Curve3 {
        Curve3::horizontal_circle(r, z, n).unwrap()
    }

    fn tilted_linked() -> Curve3 {
        let n = 97;
        Curve3::new(
            (0..n)
                .map(|k| {
                    let t = TAU * k as f64 / n as f64;
                    Vec3::new(0.3 + 1.1 * t.cos(), 0.2 + 0.8 * t.sin(), 0.4 * t.sin() + 0.2 * (2.0 * t).cos())
                })
                .collect(),
            true,
        )
        .unwrap()
    }

    fn axis() -> Curve3 {
        let a = Curve3::new((0..=40).map(|k| Vec3::new(0.0, 0.0, -20.0 + k as f64)).collect(), false).unwrap();
        close_at_radius(&a, 1e3).unwrap()
    }

    #[test]
    fn coaxial_circle_is_fixed() {
        let c = coaxial(1.0, 0.3, 64);
        for angle in [0.0, 0.37, 1.0, 2.5] {
            let out = reflect_half(&c, &HalfspaceFrame::new(angle)).unwrap();
            assert_eq!(out.components.len(), 1);
            let sag = 1.0 - (PI / 64.0).cos();
            assert!(hausdorff_distance(&out.components[0], &c) <= sag + 1e-12);
        }
        // Vertices on H move by the nudge.
        let aligned = reflect_half(&c, &HalfspaceFrame::new(0.0)).unwrap();
        assert_eq!(aligned.perturbed_vertices, 2);
        assert!(hausdorff_distance(&aligned.components[0], &c) < 2.0 * NUDGE);
        for k in [1, 2, 4, 8] {
            let out = dihedral_symmetrize(&c, &DihedralFrame::new(0.0, k).unwrap()).unwrap();
            assert_eq!(out.components.len(), 1);
            assert!(hausdorff_distance(&out.components[0], &c) < 2.0 * NUDGE);
        }
    }

    #[test]
    fn reflected_circle_stays_linked_and_symmetric() {
        let c = tilted_linked();
        assert_eq!(axis_linking(&c).unwrap().abs(), 1);
        let f = HalfspaceFrame::new(0.8);
        let out = reflect_half(&c, &f).unwrap();
        let linked: Vec<&Curve3> = out.components.iter().filter(|c| axis_linking(c).unwrap() != 0).collect();
        assert!(!linked.is_empty());
        for comp in &out.components {
            let mirrored = Curve3::new(comp.vertices().iter().map(|x| f.reflect(x)).collect(), true).unwrap();
            assert!(hausdorff_distance(&mirrored, comp) < 1e-9);
            assert_eq!(axis_linking(comp).unwrap(), linking_number(comp, &axis()).unwrap().linking_number);
        }
        assert!(select_component(&out.components).is_some());
    }

    #[test]
    fn reflect_half_is_idempotent() {
        let c = tilted_linked();
        let f = HalfspaceFrame::new(-0.4);
        let once = reflect_half(&c, &f).unwrap();
        for comp in &once.components {
            let twice = reflect_half(comp, &f).unwrap();
            assert_eq!(twice.components.len(), 1);
            assert!(hausdorff_distance(&twice.components[0], comp) < 1e-9);
        }
    }

    #[test]
    fn order_one_matches_reflect_half() {
        let c = tilted_linked();
        for angle in [0.2, 1.9] {
            let a = reflect_half(&c, &HalfspaceFrame::new(angle)).unwrap();
            let b = dihedral_symmetrize(&c, &DihedralFrame::new(angle, 1).unwrap()).unwrap();
            assert_eq!(a.components.len(), b.components.len());
            for (x, y) in a.components.iter().zip(&b.components) {
                assert!(hausdorff_distance(x, y) < 1e-12);
            }
        }
    }

    #[test]
    fn dihedral_output_has_full_symmetry() {
        let c = tilted_linked();
        let f = DihedralFrame::new(0.3, 4).unwrap();
        let out = dihedral_symmetrize(&c, &f).unwrap();
        assert!(out.components.iter().any(|c| axis_linking(c).unwrap() != 0));
        let reflections = f.reflections();
        assert_eq!(reflections.len(), 4);
        let all: Vec<Vec3> = out.components.iter().flat_map(|c| c.vertices().to_vec()).collect();
        // Reflections generate the rotations too, so the 2k group elements are covered by
        // closure; check every generator maps the vertex set into itself.
        for r in &reflections {
            for v in &all {
                let m = r(v);
                let gap = all.iter().map(|w| (w - m).norm()).fold(f64::INFINITY, f64::min);
                assert!(gap < 1e-9, "{gap}");
            }
        }
        let rotations: Vec<Vec3> = all.iter().map(|v| reflections[1](&reflections[0](v))).collect();
        for m in rotations {
            assert!(all.iter().any(|w| (w - m).norm() < 1e-9));
        }
    }

    #[test]
    fn errors() {
        let far = Curve3::circle(Vec3::new(3.0, 3.0, 0.0), 1.0, Vec3::x(), Vec3::z(), 16).unwrap();
        assert_eq!(reflect_half(&far, &HalfspaceFrame::new(0.0)), Err(SymmetrizationError::OneSided));
        let wedge = DihedralFrame::new(PI, 4).unwrap();
        assert_eq!(dihedral_symmetrize(&far, &wedge), Err(SymmetrizationError::WedgeMissed));
        let through = Curve3::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], true).unwrap();
        assert_eq!(reflect_half(&through, &HalfspaceFrame::new(0.0)), Err(SymmetrizationError::OnAxis(0)));
        let open = Curve3::new(vec![Vec3::x(), Vec3::y()], false).unwrap();
        assert_eq!(reflect_half(&open, &HalfspaceFrame::new(0.0)), Err(SymmetrizationError::NotClosed));
        assert_eq!(DihedralFrame::new(0.0, 0), Err(SymmetrizationError::BadOrder));
    }

    #[test]
    fn tangent_vertices_are_nudged() {
        let sq = Curve3::new(
            vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, -1.0, 0.0)],
            true,
        )
        .unwrap();
        let out = reflect_half(&sq, &HalfspaceFrame::new(0.0)).unwrap();
        assert_eq!(out.perturbed_vertices, 2);
        assert_eq!(axis_linking(&out.components[0]).unwrap().abs(), 1);
    }

    #[test]
    fn surrogate_circle() {
        let c = tilted_linked();
        let s = axisymmetric_surrogate(&c, 32).unwrap();
        let v = c.vertices()[0];
        assert_eq!(s.vertices()[0], v);
        for w in s.vertices() {
            assert!((w.x.hypot(w.y) - v.x.hypot(v.y)).abs() < 1e-12);
            assert_eq!(w.z, v.z);
        }
        let circle = coaxial(1.5, 0.0, 32);
        let again = axisymmetric_surrogate(&circle, 32).unwrap();
        assert!(hausdorff_distance(&again, &circle) < 1e-12);
    }

    fn random_density(seed: u64) -> CellDensity {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_xoshiro::SplitMix64::seed_from_u64(seed);
        let mut d = CellDensity::centered(1.0, 8);
        for v in d.values.iter_mut() {
            *v = rng.random::<f64>();
        }
        d
    }

    #[test]
    fn even_reflection_energy() {
        for (seed, angle) in [(1, 0.0), (2, PI / 2.0), (3, PI / 4.0), (4, -PI / 4.0)] {
            let d = random_density(seed);
            let (out, rep) = even_reflect_density(&d, &HalfspaceFrame::new(angle), 3.0).unwrap();
            assert!(rep.energy_after <= rep.energy_before);
            assert!((out.energy(3.0) - rep.energy_after).abs() <= 1e-12 * rep.energy_after);
            assert!((d.energy(3.0) - rep.energy_before).abs() <= 1e-12 * rep.energy_before);
            let (again, rep2) = even_reflect_density(&out, &HalfspaceFrame::new(angle), 3.0).unwrap();
            assert_eq!(again, out);
            assert_eq!(rep2.energy_after, rep2.energy_before);
        }
        let mut half = CellDensity::centered(1.0, 6);
        for c in 0..half.len() {
            if half.center(c).y < 0.0 {
                half.values[c] = 1.0 + c as f64 * 0.01;
            }
        }
        let (out, rep) = even_reflect_density(&half, &HalfspaceFrame::new(0.0), 3.0).unwrap();
        assert!(rep.kept_flagged_side);
        assert_eq!(rep.energy_after, 0.0);
        assert!(out.values.iter().all(|&v| v == 0.0));
        let misaligned = HalfspaceFrame::new(0.3);
        assert_eq!(even_reflect_density(&half, &misaligned, 3.0).unwrap_err(), SymmetrizationError::GridNotAligned);
    }
}
