//! Cell-wise evaluation of the discrete p-energy.
//!
//! Each lattice cell contributes `(h³/8) Σ_c φ(|g_c|²)` over its eight corners, where `g_c` is
//! the forward-difference gradient built from the three cell edges at corner `c` and
//! `φ(s) = (s + ε²)^{p/2}`. Differentiating gives an edge-weighted graph Laplacian: every
//! (cell, corner) pair adds `κ = (h/4) φ'(|g_c|²)` to the weight of each of its three edges.

use super::grid::{VoxelGrid, FREE};

#[derive(Clone, Copy, Debug)]
pub(crate) struct PowerLaw {
    p: f64,
    eps2: f64,
}

impl PowerLaw {
    pub fn new(p: f64, eps: f64) -> Self {
        PowerLaw { p, eps2: eps * eps }
    }

    #[inline(always)]
    pub fn phi(&self, s: f64) -> f64 {
        let t = s + self.eps2;
        if self.p == 3.0 {
            t * t.sqrt()
        } else if self.p == 2.0 {
            t
        } else {
            t.powf(0.5 * self.p)
        }
    }

    #[inline(always)]
    pub fn dphi(&self, s: f64) -> f64 {
        let t = s + self.eps2;
        if self.p == 3.0 {
            1.5 * t.sqrt()
        } else if self.p == 2.0 {
            1.0
        } else {
            0.5 * self.p * t.powf(0.5 * self.p - 1.0)
        }
    }

    #[inline(always)]
    pub fn d2phi(&self, s: f64) -> f64 {
        let t = s + self.eps2;
        if self.p == 3.0 {
            0.75 / t.sqrt()
        } else if self.p == 2.0 {
            0.0
        } else {
            0.5 * self.p * (0.5 * self.p - 1.0) * t.powf(0.5 * self.p - 2.0)
        }
    }
}

/// Node offsets of the corners `(a, b, c)` of a cell, indexed by `a + 2b + 4c`.
pub(crate) fn corner_offsets(dims: [usize; 3]) -> [usize; 8] {
    let (sy, sz) = (dims[0], dims[0] * dims[1]);
    std::array::from_fn(|m| (m & 1) + ((m >> 1) & 1) * sy + ((m >> 2) & 1) * sz)
}

/// Cell edge differences: `x[b + 2c]`, `y[a + 2c]`, `z[a + 2b]`.
#[inline(always)]
pub(crate) fn edge_diffs(v: &[f64; 8]) -> [[f64; 4]; 3] {
    [
        [v[1] - v[0], v[3] - v[2], v[5] - v[4], v[7] - v[6]],
        [v[2] - v[0], v[3] - v[1], v[6] - v[4], v[7] - v[5]],
        [v[4] - v[0], v[5] - v[1], v[6] - v[2], v[7] - v[3]],
    ]
}

/// Edge slots (axis, index into [`edge_diffs`]) used by corner `a + 2b + 4c`.
#[inline(always)]
pub(crate) const fn corner_edges(m: usize) -> [usize; 3] {
    let (a, b, c) = (m & 1, (m >> 1) & 1, (m >> 2) & 1);
    [b + 2 * c, a + 2 * c, a + 2 * b]
}

/// Lower-node corner index of each edge slot, per axis.
pub(crate) const EDGE_BASE: [[usize; 4]; 3] = [[0, 2, 4, 6], [0, 1, 4, 5], [0, 1, 2, 3]];

#[inline(always)]
pub(crate) fn corner_sq(e: &[[f64; 4]; 3], m: usize) -> f64 {
    let [ix, iy, iz] = corner_edges(m);
    e[0][ix] * e[0][ix] + e[1][iy] * e[1][iy] + e[2][iz] * e[2][iz]
}

#[inline(always)]
pub(crate) fn corner_dot(e: &[[f64; 4]; 3], f: &[[f64; 4]; 3], m: usize) -> f64 {
    let [ix, iy, iz] = corner_edges(m);
    e[0][ix] * f[0][ix] + e[1][iy] * f[1][iy] + e[2][iz] * f[2][iz]
}

/// Cells with at least one free corner, flagged at their lower node; and the energy of
/// the remaining cells (constant, as all their corners are fixed).
pub(crate) struct CellMap {
    pub dims: [usize; 3],
    pub active: Vec<bool>,
    pub offsets: [usize; 8],
}

impl CellMap {
    pub fn new(grid: &VoxelGrid) -> Self {
        let dims = grid.dims();
        let offsets = corner_offsets(dims);
        let labels = grid.labels();
        let mut active = vec![false; grid.node_count()];
        for_each_cell(dims, |base| {
            active[base] = offsets.iter().any(|o| labels[base + o] == FREE);
        });
        CellMap { dims, active, offsets }
    }

    /// Energy of the fixed-only cells for the given boundary values.
    pub fn fixed_energy(&self, u: &[f64], law: &PowerLaw, h: f64) -> f64 {
        let mut total = 0.0;
        let scale = h * h * h / 8.0;
        let inv_h2 = 1.0 / (h * h);
        for_each_cell(self.dims, |base| {
            if !self.active[base] {
                let v = self.offsets.map(|o| u[base + o]);
                let e = edge_diffs(&v);
                if e.iter().flatten().any(|&x| x != 0.0) {
                    total += scale * (0..8).map(|m| law.phi(corner_sq(&e, m) * inv_h2)).sum::<f64>();
                }
            }
        });
        total
    }
}

#[inline(always)]
pub(crate) fn for_each_cell(dims: [usize; 3], mut f: impl FnMut(usize)) {
    let [nx, ny, nz] = dims;
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            let row = nx * (j + ny * k);
            for i in 0..nx - 1 {
                f(row + i);
            }
        }
    }
}

/// Energy over active cells, with edge weights written into `w` (zeroed first).
pub(crate) fn assemble(cells: &CellMap, u: &[f64], law: &PowerLaw, h: f64, w: &mut [Vec<f32>; 3]) -> f64 {
    for a in w.iter_mut() {
        a.fill(0.0);
    }
    let scale = h * h * h / 8.0;
    let inv_h2 = 1.0 / (h * h);
    let kscale = 0.25 * h;
    let o = cells.offsets;
    let mut total = 0.0;
    let [nx, ny, nz] = cells.dims;
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            let row = nx * (j + ny * k);
            let mut row_sum = 0.0;
            for i in 0..nx - 1 {
                let base = row + i;
                if !cells.active[base] {
                    continue;
                }
                let v = o.map(|off| u[base + off]);
                let e = edge_diffs(&v);
                let mut kap = [0.0f64; 8];
                let mut en = 0.0;
                for (m, km) in kap.iter_mut().enumerate() {
                    let s = corner_sq(&e, m) * inv_h2;
                    en += law.phi(s);
                    *km = kscale * law.dphi(s);
                }
                row_sum += en;
                for (axis, wa) in w.iter_mut().enumerate() {
                    let stride = 1 << axis;
                    for &corner in &EDGE_BASE[axis] {
                        wa[base + o[corner]] += (kap[corner] + kap[corner + stride]) as f32;
                    }
                }
            }
            total += row_sum;
        }
    }
    total * scale
}

/// Value, first and second derivative of `α ↦ E(u + α d)`, over active cells.
pub(crate) fn directional(cells: &CellMap, u: &[f64], d: &[f32], alpha: f64, law: &PowerLaw, h: f64) -> (f64, f64, f64) {
    let scale = h * h * h / 8.0;
    let inv_h2 = 1.0 / (h * h);
    let o = cells.offsets;
    let (mut g0, mut g1, mut g2) = (0.0, 0.0, 0.0);
    let [nx, ny, nz] = cells.dims;
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            let row = nx * (j + ny * k);
            let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
            for i in 0..nx - 1 {
                let base = row + i;
                if !cells.active[base] {
                    continue;
                }
                let dv = o.map(|off| d[base + off] as f64);
                let v: [f64; 8] = std::array::from_fn(|m| u[base + o[m]] + alpha * dv[m]);
                let e = edge_diffs(&v);
                let f = edge_diffs(&dv);
                for m in 0..8 {
                    let s = corner_sq(&e, m) * inv_h2;
                    let sd = corner_dot(&e, &f, m) * inv_h2;
                    let dd = corner_sq(&f, m) * inv_h2;
                    let d1 = law.dphi(s);
                    r0 += law.phi(s);
                    r1 += 2.0 * d1 * sd;
                    r2 += 4.0 * law.d2phi(s) * sd * sd + 2.0 * d1 * dd;
                }
            }
            g0 += r0;
            g1 += r1;
            g2 += r2;
        }
    }
    (g0 * scale, g1 * scale, g2 * scale)
}

/// Largest corner gradient norm.
pub(crate) fn max_gradient(cells: &CellMap, u: &[f64], h: f64) -> f64 {
    let inv_h2 = 1.0 / (h * h);
    let o = cells.offsets;
    let mut best = 0.0f64;
    for_each_cell(cells.dims, |base| {
        if cells.active[base] {
            let v = o.map(|off| u[base + off]);
            let e = edge_diffs(&v);
            for m in 0..8 {
                best = best.max(corner_sq(&e, m) * inv_h2);
            }
        }
    });
    best.sqrt()
}

/// Plain energy `(h³/8) Σ φ` over active cells.
pub(crate) fn energy(cells: &CellMap, u: &[f64], law: &PowerLaw, h: f64) -> f64 {
    let inv_h2 = 1.0 / (h * h);
    let o = cells.offsets;
    let mut total = 0.0;
    let [nx, ny, nz] = cells.dims;
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            let row = nx * (j + ny * k);
            let mut r = 0.0;
            for i in 0..nx - 1 {
                let base = row + i;
                if cells.active[base] {
                    let e = edge_diffs(&o.map(|off| u[base + off]));
                    r += (0..8).map(|m| law.phi(corner_sq(&e, m) * inv_h2)).sum::<f64>();
                }
            }
            total += r;
        }
    }
    total * h * h * h / 8.0
}
