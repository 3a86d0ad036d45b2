use serde::Serialize;

use super::PdeError;
use super::pipeline::BoxChart;
use crate::geometry::{CliffordFrame, Curve3, Side, Vec3};

/// Node labels of a [`VoxelGrid`].
pub const FREE: u8 = 0;
pub const C0: u8 = 1;
pub const C1: u8 = 2;

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridBox {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl GridBox {
    pub fn new(lo: Vec3, hi: Vec3) -> Result<Self, PdeError> {
        if (0..3).any(|d| !(hi[d] > lo[d])) {
            return Err(PdeError::EmptyBox);
        }
        Ok(GridBox { lo, hi })
    }

    /// The cube `[a, b]³`.
    pub fn cube(a: f64, b: f64) -> Result<Self, PdeError> {
        GridBox::new(Vec3::repeat(a), Vec3::repeat(b))
    }

    pub fn contains(&self, x: &Vec3, margin: f64) -> bool {
        (0..3).all(|d| x[d] >= self.lo[d] + margin && x[d] <= self.hi[d] - margin)
    }
}

/// Cartesian lattice of nodes with spacing `h` over a box, each node labelled
/// [`FREE`], [`C0`] or [`C1`]. A node stands for the voxel of the dual grid around it.
#[derive(Clone, Debug)]
pub struct VoxelGrid {
    origin: Vec3,
    h: f64,
    dims: [usize; 3],
    labels: Vec<u8>,
}

impl VoxelGrid {
    /// All-free grid covering `b`; the upper corner is rounded up to a whole number of steps.
    pub fn new(b: &GridBox, h: f64) -> Result<Self, PdeError> {
        if !(h > 0.0) {
            return Err(PdeError::BadSpacing(h));
        }
        let dims = std::array::from_fn(|d| ((b.hi[d] - b.lo[d]) / h - 1e-9).ceil() as usize + 1);
        Ok(Self::with_dims(b.lo, h, dims))
    }

    pub fn with_dims(origin: Vec3, h: f64, dims: [usize; 3]) -> Self {
        VoxelGrid { origin, h, dims, labels: vec![FREE; dims[0] * dims[1] * dims[2]] }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn bounds(&self) -> GridBox {
        let ext = Vec3::from_fn(|d, _| (self.dims[d] - 1) as f64 * self.h);
        GridBox { lo: self.origin, hi: self.origin + ext }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u8] {
        &mut self.labels
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn ijk(&self, n: usize) -> [usize; 3] {
        let i = n % self.dims[0];
        let r = n / self.dims[0];
        [i, r % self.dims[1], r / self.dims[1]]
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.h
    }

    pub fn count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Checks that both masks are nonempty and 6-connected.
    pub fn validate(&self) -> Result<(), PdeError> {
        for (label, name) in [(C0, "C0"), (C1, "C1")] {
            let comps = self.components(label);
            if comps == 0 {
                return Err(PdeError::EmptyMask(name));
            }
            if comps > 1 {
                return Err(PdeError::DisconnectedMask(name, comps));
            }
        }
        Ok(())
    }

    /// Number of 6-connected components of the nodes carrying `label`.
    pub fn components(&self, label: u8) -> usize {
        let mut seen = vec![false; self.labels.len()];
        let mut stack = Vec::new();
        let mut comps = 0;
        for start in 0..self.labels.len() {
            if self.labels[start] != label || seen[start] {
                continue;
            }
            comps += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(n) = stack.pop() {
                self.for_neighbors(n, |m| {
                    if self.labels[m] == label && !seen[m] {
                        seen[m] = true;
                        stack.push(m);
                    }
                });
            }
        }
        comps
    }

    #[inline]
    pub fn for_neighbors(&self, n: usize, mut f: impl FnMut(usize)) {
        let [i, j, k] = self.ijk(n);
        let [nx, ny, nz] = self.dims;
        let sy = nx;
        let sz = nx * ny;
        if i > 0 {
            f(n - 1);
        }
        if i + 1 < nx {
            f(n + 1);
        }
        if j > 0 {
            f(n - sy);
        }
        if j + 1 < ny {
            f(n + sy);
        }
        if k > 0 {
            f(n - sz);
        }
        if k + 1 < nz {
            f(n + sz);
        }
    }
}

/// One piece of a condenser plate.
#[derive(Clone, Debug)]
pub enum CondenserSet {
    /// Closed `radius`-neighbourhood of a polyline. With `clip` the curve may leave the box.
    Tube { curve: Curve3, radius: f64, clip: bool },
    /// Closed ball.
    Ball { center: Vec3, radius: f64 },
    /// Complement of the open ball.
    Exterior { center: Vec3, radius: f64 },
    /// Complement of the open solid torus of revolution about the z-axis with the given
    /// core and tube radii, shrunk by `inset`.
    TorusExterior { major: f64, minor: f64, inset: f64 },
    /// Points whose lift lies on the given side of a Clifford frame.
    FrameSide { frame: CliffordFrame, side: Side, chart: BoxChart },
}

impl CondenserSet {
    pub fn tube(curve: Curve3, radius: f64) -> Self {
        CondenserSet::Tube { curve, radius, clip: false }
    }

    fn check_inside(&self, b: &GridBox, h: f64) -> Result<(), PdeError> {
        if let CondenserSet::Tube { curve, clip: false, .. } = self {
            if let Some(v) = curve.vertices().iter().position(|x| !b.contains(x, 5.0 * h)) {
                return Err(PdeError::CurveOutsideBox(v));
            }
        }
        Ok(())
    }

    fn mark(&self, grid: &VoxelGrid, hit: &mut [bool]) {
        let h = grid.h;
        let [nx, ny, nz] = grid.dims;
        match self {
            CondenserSet::Tube { curve, radius, .. } => {
                let r2 = radius * radius;
                for (a, b) in curve.segments() {
                    let lo = a.inf(&b).add_scalar(-radius);
                    let hi = a.sup(&b).add_scalar(*radius);
                    let range = |d: usize, n: usize| {
                        let s = ((lo[d] - grid.origin[d]) / h).ceil().max(0.0) as usize;
                        let e = ((hi[d] - grid.origin[d]) / h).floor();
                        if e < 0.0 {
                            (1, 0)
                        } else {
                            (s, (e as usize).min(n - 1))
                        }
                    };
                    let (i0, i1) = range(0, nx);
                    let (j0, j1) = range(1, ny);
                    let (k0, k1) = range(2, nz);
                    let ab = b - a;
                    let len2 = ab.norm_squared();
                    for k in k0..=k1 {
                        for j in j0..=j1 {
                            for i in i0..=i1 {
                                let x = grid.position(i, j, k);
                                let t = ((x - a).dot(&ab) / len2).clamp(0.0, 1.0);
                                if (x - a - ab * t).norm_squared() <= r2 {
                                    hit[grid.index(i, j, k)] = true;
                                }
                            }
                        }
                    }
                }
            }
            _ => {
                for (n, flag) in hit.iter_mut().enumerate() {
                    let [i, j, k] = grid.ijk(n);
                    if self.contains(&grid.position(i, j, k)) {
                        *flag = true;
                    }
                }
            }
        }
    }

    /// Pointwise membership (tubes by distance to the polyline).
    pub fn contains(&self, x: &Vec3) -> bool {
        match self {
            CondenserSet::Tube { curve, radius, .. } => {
                curve.segments().any(|(a, b)| point_segment_distance(x, &a, &b) <= *radius)
            }
            CondenserSet::Ball { center, radius } => (x - center).norm() <= *radius,
            CondenserSet::Exterior { center, radius } => (x - center).norm() >= *radius,
            CondenserSet::TorusExterior { major, minor, inset } => {
                let rho = (x.x * x.x + x.y * x.y).sqrt();
                ((rho - major).powi(2) + x.z * x.z).sqrt() >= minor - inset
            }
            CondenserSet::FrameSide { frame, side, chart } => frame.side(&chart.from_box(x), 0.0) == Some(*side),
        }
    }
}

pub fn point_segment_distance(x: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((x - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (x - a - ab * t).norm()
}

/// Labels the nodes of a grid over `b` covered by the two plates.
pub fn rasterize_sets(
    c0: &[CondenserSet],
    c1: &[CondenserSet],
    b: &GridBox,
    h: f64,
) -> Result<VoxelGrid, PdeError> {
    let mut grid = VoxelGrid::new(b, h)?;
    for s in c0.iter().chain(c1) {
        s.check_inside(b, h)?;
    }
    let mut m0 = vec![false; grid.node_count()];
    let mut m1 = vec![false; grid.node_count()];
    for s in c0 {
        s.mark(&grid, &mut m0);
    }
    for s in c1 {
        s.mark(&grid, &mut m1);
    }
    for (n, (a, b)) in m0.iter().zip(&m1).enumerate() {
        grid.labels[n] = match (a, b) {
            (true, true) => return Err(PdeError::MaskOverlap(n)),
            (true, false) => C0,
            (false, true) => C1,
            _ => FREE,
        };
    }
    grid.validate()?;
    Ok(grid)
}

/// Labels the `r_thick`-tubes around two curves.
pub fn rasterize_condenser(
    c0: &Curve3,
    c1: &Curve3,
    b: &GridBox,
    h: f64,
    r_thick: f64,
) -> Result<VoxelGrid, PdeError> {
    if r_thick < h {
        return Err(PdeError::ThinTube { r_thick, h });
    }
    rasterize_sets(&[CondenserSet::tube(c0.clone(), r_thick)], &[CondenserSet::tube(c1.clone(), r_thick)], b, h)
}

/// Grid with the label of every node within one coarse step merged onto coarse nodes at
/// twice the spacing. Fails when both labels meet on one coarse node.
pub(crate) fn coarsen(grid: &VoxelGrid) -> Option<VoxelGrid> {
    let dims = grid.dims.map(|n| (n - 1).div_ceil(2) + 1);
    let mut coarse = VoxelGrid::with_dims(grid.origin, 2.0 * grid.h, dims);
    let [fx, fy, fz] = grid.dims;
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let mut label = FREE;
                for dk in -1i64..=1 {
                    for dj in -1i64..=1 {
                        for di in -1i64..=1 {
                            let (a, b, c) = (2 * i as i64 + di, 2 * j as i64 + dj, 2 * k as i64 + dk);
                            if a < 0 || b < 0 || c < 0 || a >= fx as i64 || b >= fy as i64 || c >= fz as i64 {
                                continue;
                            }
                            let l = grid.labels[grid.index(a as usize, b as usize, c as usize)];
                            if l != FREE {
                                if label != FREE && label != l {
                                    return None;
                                }
                                label = l;
                            }
                        }
                    }
                }
                let n = coarse.index(i, j, k);
                coarse.labels[n] = label;
            }
        }
    }
    Some(coarse)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_counts() {
        let g = VoxelGrid::new(&GridBox::cube(0.0, 1.0).unwrap(), 0.5).unwrap();
        assert_eq!(g.node_count(), 27);
        let g = VoxelGrid::new(&GridBox::cube(0.0, 1.0).unwrap(), 0.25).unwrap();
        assert_eq!(g.node_count(), 125);
        assert!(GridBox::cube(1.0, 1.0).is_err());
    }

    #[test]
    fn circle_tube_is_a_solid_torus() {
        let c = Curve3::horizontal_circle(1.0, 0.0, 200).unwrap();
        let far = Curve3::horizontal_circle(0.1, 0.0, 20).unwrap();
        let b = GridBox::cube(-1.5, 1.5).unwrap();
        let g = rasterize_condenser(&c, &far, &b, 0.05, 0.05).unwrap();
        assert_eq!(g.components(C0), 1);
        let inner = g.index(32, 30, 30);
        assert_eq!(g.labels()[inner], C1);
        // the hole of the torus is free
        let n = g.index(30 + 10, 30, 30);
        assert_eq!(g.labels()[n], FREE);
        let on = g.index(30 + 20, 30, 30);
        assert_eq!(g.labels()[on], C0);
    }

    #[test]
    fn overlap_and_outside_are_errors() {
        let a = Curve3::horizontal_circle(1.0, 0.0, 50).unwrap();
        let b = Curve3::horizontal_circle(1.02, 0.0, 50).unwrap();
        let bx = GridBox::cube(-2.0, 2.0).unwrap();
        assert!(matches!(rasterize_condenser(&a, &b, &bx, 0.05, 0.05), Err(PdeError::MaskOverlap(_))));
        let big = Curve3::horizontal_circle(1.9, 0.0, 50).unwrap();
        assert!(matches!(rasterize_condenser(&a, &big, &bx, 0.05, 0.05), Err(PdeError::CurveOutsideBox(0))));
        assert!(rasterize_condenser(&a, &big, &bx, 0.05, 0.01).is_err());
    }

    #[test]
    fn coarsening_keeps_thin_tubes() {
        let c = Curve3::horizontal_circle(1.0, 0.3, 200).unwrap();
        let d = Curve3::horizontal_circle(1.0, -0.3, 200).unwrap();
        let b = GridBox::cube(-1.5, 1.5).unwrap();
        let g = rasterize_condenser(&c, &d, &b, 1.0 / 32.0, 1.0 / 32.0).unwrap();
        let cg = coarsen(&g).unwrap();
        assert_eq!(cg.h(), 1.0 / 16.0);
        cg.validate().unwrap();
        let cc = coarsen(&coarsen(&cg).unwrap());
        assert!(cc.is_none() || cc.unwrap().validate().is_ok());
    }
}
