//! The optimal density `ρ = |∇u|` and the potential it induces, `u(x) = inf ∫_γ ρ` over
//! paths from `C0` to `x`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::grid::{VoxelGrid, C0, FREE};
use super::solver::{CapacityResult, ScalarField};
use crate::geometry::Vec3;

/// A cell-centred density on a box lattice: cell `(i, j, k)` has centre
/// `origin + (i + ½, j + ½, k + ½)·h`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellDensity {
    pub origin: Vec3,
    pub h: f64,
    pub dims: [usize; 3],
    pub values: Vec<f64>,
}

impl CellDensity {
    /// Zero density on the cells of `[-half, half]³` with `cells` cells per side.
    pub fn centered(half: f64, cells: usize) -> Self {
        let h = 2.0 * half / cells as f64;
        CellDensity { origin: Vec3::repeat(-half), h, dims: [cells; 3], values: vec![0.0; cells * cells * cells] }
    }

    /// Zero density on the cells of a node grid.
    pub fn for_grid(grid: &VoxelGrid) -> Self {
        let dims = grid.dims().map(|n| n - 1);
        CellDensity { origin: grid.origin(), h: grid.h(), dims, values: vec![0.0; dims.iter().product()] }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, n: usize) -> Vec3 {
        let [nx, ny, _] = self.dims;
        let (i, j, k) = (n % nx, (n / nx) % ny, n / (nx * ny));
        self.origin + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * self.h
    }

    /// Index of the cell whose centre is `x`, if `x` is a cell centre.
    pub fn locate(&self, x: &Vec3) -> Option<usize> {
        let mut idx = [0usize; 3];
        for d in 0..3 {
            let s = (x[d] - self.origin[d]) / self.h - 0.5;
            let r = s.round();
            if (s - r).abs() > 1e-9 || r < 0.0 || r as usize >= self.dims[d] {
                return None;
            }
            idx[d] = r as usize;
        }
        Some(idx[0] + self.dims[0] * (idx[1] + self.dims[1] * idx[2]))
    }

    /// `Σ ρ^p h³`.
    pub fn energy(&self, p: f64) -> f64 {
        self.values.iter().map(|r| r.abs().powf(p)).sum::<f64>() * self.h.powi(3)
    }
}

/// `|∇u|` at every cell centre, from the mean of the four edge differences per axis.
pub fn density_from_potential(res: &CapacityResult) -> CellDensity {
    let grid = &res.grid;
    let u = &res.field.values;
    let mut rho = CellDensity::for_grid(grid);
    let [cx, cy, cz] = rho.dims;
    let inv = 0.25 / grid.h();
    let mut n = 0;
    for k in 0..cz {
        for j in 0..cy {
            for i in 0..cx {
                let v: [f64; 8] = std::array::from_fn(|m| u[grid.index(i + (m & 1), j + ((m >> 1) & 1), k + (m >> 2))]);
                let gx = (v[1] - v[0]) + (v[3] - v[2]) + (v[5] - v[4]) + (v[7] - v[6]);
                let gy = (v[2] - v[0]) + (v[3] - v[1]) + (v[6] - v[4]) + (v[7] - v[5]);
                let gz = (v[4] - v[0]) + (v[5] - v[1]) + (v[6] - v[2]) + (v[7] - v[3]);
                rho.values[n] = inv * (gx * gx + gy * gy + gz * gz).sqrt();
                n += 1;
            }
        }
    }
    rho
}

#[derive(Clone, Copy, PartialEq)]
struct Front(f64, usize);

impl Eq for Front {}

impl Ord for Front {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Front {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// First-order upwind update for `|∇T| = f` from the smallest accepted neighbour value
/// along each axis.
fn eikonal_update(mut a: [f64; 3], fh: f64) -> f64 {
    a.sort_by(f64::total_cmp);
    let mut t = a[0] + fh;
    for m in 2..=3 {
        if !a[m - 1].is_finite() || t <= a[m - 1] {
            break;
        }
        let s: f64 = a[..m].iter().sum();
        let q: f64 = a[..m].iter().map(|x| x * x).sum();
        let mf = m as f64;
        let disc = s * s - mf * (q - fh * fh);
        if disc < 0.0 {
            break;
        }
        t = (s + disc.sqrt()) / mf;
    }
    t
}

/// Weighted distance from the `C0` nodes under the metric `ρ|dx|`, by fast marching with
/// nodal speeds averaged from the adjacent cells, clamped at 1.
pub fn potential_from_density(rho: &CellDensity, grid: &VoxelGrid) -> ScalarField {
    let dims = grid.dims();
    let [nx, ny, nz] = dims;
    let n = grid.node_count();
    let mut f = vec![0.0; n];
    for (node, fv) in f.iter_mut().enumerate() {
        let [i, j, k] = grid.ijk(node);
        let (mut sum, mut cnt) = (0.0, 0);
        for m in 0..8 {
            let (di, dj, dk) = (m & 1, (m >> 1) & 1, m >> 2);
            if i + di == 0 || j + dj == 0 || k + dk == 0 || i + di > nx - 1 || j + dj > ny - 1 || k + dk > nz - 1 {
                continue;
            }
            let (ci, cj, ck) = (i + di - 1, j + dj - 1, k + dk - 1);
            sum += rho.values[ci + rho.dims[0] * (cj + rho.dims[1] * ck)];
            cnt += 1;
        }
        *fv = if cnt > 0 { sum / cnt as f64 } else { 0.0 };
    }
    let h = grid.h();
    let mut t = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for (node, &l) in grid.labels().iter().enumerate() {
        if l == C0 {
            t[node] = 0.0;
            heap.push(Front(0.0, node));
        }
    }
    let stride = [1, nx, nx * ny];
    while let Some(Front(tv, node)) = heap.pop() {
        if done[node] || tv > t[node] {
            continue;
        }
        done[node] = true;
        grid.for_neighbors(node, |m| {
            if done[m] {
                return;
            }
            let ijk = grid.ijk(m);
            let a: [f64; 3] = std::array::from_fn(|d| {
                let mut best = f64::INFINITY;
                if ijk[d] > 0 && done[m - stride[d]] {
                    best = best.min(t[m - stride[d]]);
                }
                if ijk[d] + 1 < dims[d] && done[m + stride[d]] {
                    best = best.min(t[m + stride[d]]);
                }
                best
            });
            let cand = eikonal_update(a, f[m] * h);
            if cand < t[m] {
                t[m] = cand;
                heap.push(Front(cand, m));
            }
        });
    }
    ScalarField { values: t.into_iter().map(|x| x.min(1.0)).collect() }
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    /// Largest `|u − ũ|` over free nodes.
    pub max_error: f64,
    pub mean_error: f64,
}

/// Compares a solution with the potential recovered from its own density.
pub fn round_trip(res: &CapacityResult) -> RoundTrip {
    let rho = density_from_potential(res);
    let back = potential_from_density(&rho, &res.grid);
    let (mut max, mut sum, mut cnt) = (0.0f64, 0.0, 0usize);
    for ((a, b), &l) in res.field.values.iter().zip(&back.values).zip(res.grid.labels()) {
        if l == FREE {
            let e = (a - b).abs();
            max = max.max(e);
            sum += e;
            cnt += 1;
        }
    }
    RoundTrip { max_error: max, mean_error: sum / cnt.max(1) as f64 }
}
