//! The edge-weighted 7-point Laplacian and a conjugate gradient solver preconditioned by a
//! geometric multigrid V-cycle.

use super::grid::FREE;

pub(crate) struct Laplacian<'a> {
    pub dims: [usize; 3],
    pub w: &'a [Vec<f32>; 3],
    pub labels: &'a [u8],
}

impl Laplacian<'_> {
    /// `out_n = Σ_m W_nm (x_n − x_m)` over the existing neighbours of every node, computed
    /// in `f64` and handed to `emit`. Fixed nodes are not special-cased.
    #[inline(always)]
    pub fn apply_with<T: Copy + Into<f64>>(&self, x: &[T], mut emit: impl FnMut(usize, f64)) {
        let [nx, ny, nz] = self.dims;
        let (sy, sz) = (nx, nx * ny);
        let [wx, wy, wz] = self.w;
        let general = |n: usize, i: usize, j: usize, k: usize| -> f64 {
            let xn: f64 = x[n].into();
            let mut acc = 0.0;
            if i + 1 < nx {
                acc += wx[n] as f64 * (xn - x[n + 1].into());
            }
            if i > 0 {
                acc += wx[n - 1] as f64 * (xn - x[n - 1].into());
            }
            if j + 1 < ny {
                acc += wy[n] as f64 * (xn - x[n + sy].into());
            }
            if j > 0 {
                acc += wy[n - sy] as f64 * (xn - x[n - sy].into());
            }
            if k + 1 < nz {
                acc += wz[n] as f64 * (xn - x[n + sz].into());
            }
            if k > 0 {
                acc += wz[n - sz] as f64 * (xn - x[n - sz].into());
            }
            acc
        };
        for k in 0..nz {
            for j in 0..ny {
                let row = nx * (j + ny * k);
                let interior = j > 0 && j + 1 < ny && k > 0 && k + 1 < nz && nx > 2;
                if !interior {
                    for i in 0..nx {
                        emit(row + i, general(row + i, i, j, k));
                    }
                    continue;
                }
                emit(row, general(row, 0, j, k));
                // interior row: all six neighbours exist
                let (xr, xm, xp) = (&x[row..row + nx], &x[row - sy..row - sy + nx], &x[row + sy..row + sy + nx]);
                let (xb, xf) = (&x[row - sz..row - sz + nx], &x[row + sz..row + sz + nx]);
                let (wxr, wyr, wym) = (&wx[row..row + nx], &wy[row..row + nx], &wy[row - sy..row - sy + nx]);
                let (wzr, wzb) = (&wz[row..row + nx], &wz[row - sz..row - sz + nx]);
                for i in 1..nx - 1 {
                    let c: f64 = xr[i].into();
                    let acc = wxr[i] as f64 * (c - xr[i + 1].into())
                        + wxr[i - 1] as f64 * (c - xr[i - 1].into())
                        + wyr[i] as f64 * (c - xp[i].into())
                        + wym[i] as f64 * (c - xm[i].into())
                        + wzr[i] as f64 * (c - xf[i].into())
                        + wzb[i] as f64 * (c - xb[i].into());
                    emit(row + i, acc);
                }
                emit(row + nx - 1, general(row + nx - 1, nx - 1, j, k));
            }
        }
    }

    /// Writes `−∇E = −A u` into `r` and returns `|∇E|²`.
    pub fn neg_gradient(&self, u: &[f64], r: &mut [f32]) -> f64 {
        let mut norm2 = 0.0;
        let labels = self.labels;
        self.apply_with(u, |n, g| {
            let g = if labels[n] == FREE { g } else { 0.0 };
            r[n] = -g as f32;
            norm2 += g * g;
        });
        norm2
    }

}


/// Neighbour sum `Σ_m W_nm x_m` at node `n = (i, j, k)`.
#[inline(always)]
fn neighbour_sum(dims: [usize; 3], w: &[Vec<f32>; 3], x: &[f32], n: usize, i: usize, j: usize, k: usize) -> f32 {
    let [nx, ny, nz] = dims;
    let (sy, sz) = (nx, nx * ny);
    let [wx, wy, wz] = w;
    let mut acc = 0.0f32;
    if i + 1 < nx {
        acc += wx[n] * x[n + 1];
    }
    if i > 0 {
        acc += wx[n - 1] * x[n - 1];
    }
    if j + 1 < ny {
        acc += wy[n] * x[n + sy];
    }
    if j > 0 {
        acc += wy[n - sy] * x[n - sy];
    }
    if k + 1 < nz {
        acc += wz[n] * x[n + sz];
    }
    if k > 0 {
        acc += wz[n - sz] * x[n - sz];
    }
    acc
}

/// One Gauss–Seidel half-sweep over the nodes with `(i + j + k) % 2 == color`.
fn gauss_seidel(dims: [usize; 3], w: &[Vec<f32>; 3], dinv: &[f32], x: &mut [f32], b: &[f32], color: usize) {
    let [nx, ny, nz] = dims;
    let (sy, sz) = (nx, nx * ny);
    let [wx, wy, wz] = w;
    for k in 0..nz {
        for j in 0..ny {
            let row = nx * (j + ny * k);
            let start = (color + j + k) % 2;
            let interior = j > 0 && j + 1 < ny && k > 0 && k + 1 < nz;
            let mut i = start;
            while i < nx {
                let n = row + i;
                if dinv[n] != 0.0 {
                    let s = if interior && i > 0 && i + 1 < nx {
                        wx[n] * x[n + 1]
                            + wx[n - 1] * x[n - 1]
                            + wy[n] * x[n + sy]
                            + wy[n - sy] * x[n - sy]
                            + wz[n] * x[n + sz]
                            + wz[n - sz] * x[n - sz]
                    } else {
                        neighbour_sum(dims, w, x, n, i, j, k)
                    };
                    x[n] = (b[n] + s) * dinv[n];
                }
                i += 2;
            }
        }
    }
}

fn inverse_diagonal(dims: [usize; 3], w: &[Vec<f32>; 3], free: impl Fn(usize) -> bool, dinv: &mut [f32]) {
    let [nx, ny, _] = dims;
    for (n, d) in dinv.iter_mut().enumerate() {
        if !free(n) {
            *d = 0.0;
            continue;
        }
        let i = n % nx;
        let j = (n / nx) % ny;
        let k = n / (nx * ny);
        let mut s = 0.0f64;
        let [wx, wy, wz] = w;
        if i + 1 < nx {
            s += wx[n] as f64;
        }
        if i > 0 {
            s += wx[n - 1] as f64;
        }
        if j + 1 < ny {
            s += wy[n] as f64;
        }
        if j > 0 {
            s += wy[n - nx] as f64;
        }
        if k + 1 < dims[2] {
            s += wz[n] as f64;
        }
        if k > 0 {
            s += wz[n - nx * ny] as f64;
        }
        *d = if s > 0.0 { (1.0 / s) as f32 } else { 0.0 };
    }
}

struct CoarseLevel {
    dims: [usize; 3],
    w: [Vec<f32>; 3],
    dinv: Vec<f32>,
    free: Vec<bool>,
    x: Vec<f32>,
    b: Vec<f32>,
    r: Vec<f32>,
}

fn coarse_dims(d: [usize; 3]) -> [usize; 3] {
    d.map(|n| (n - 1).div_ceil(2) + 1)
}

/// Geometric multigrid hierarchy for the Laplacian of one grid. Coarse nodes sit on the
/// even fine nodes; coarse edge weights combine the two fine edges they span in series and
/// the neighbouring parallel edges with weights `(1/2, 1, 1/2)²`.
pub(crate) struct Multigrid {
    fine_dims: [usize; 3],
    levels: Vec<CoarseLevel>,
    tmp: Vec<f32>,
}

const TW: [f32; 3] = [0.5, 1.0, 0.5];
const COARSEST_NODES: usize = 4096;

impl Multigrid {
    pub fn new(dims: [usize; 3], labels: &[u8]) -> Self {
        let mut levels: Vec<CoarseLevel> = Vec::new();
        let mut d = dims;
        let mut fine_free: Vec<bool> = labels.iter().map(|&l| l == FREE).collect();
        while d.iter().product::<usize>() > COARSEST_NODES && d.iter().all(|&n| n >= 5) {
            let cd = coarse_dims(d);
            let cn: usize = cd.iter().product();
            let mut free = vec![false; cn];
            for k in 0..cd[2] {
                for j in 0..cd[1] {
                    for i in 0..cd[0] {
                        let (fi, fj, fk) = (2 * i, 2 * j, 2 * k);
                        if fi < d[0] && fj < d[1] && fk < d[2] {
                            free[i + cd[0] * (j + cd[1] * k)] = fine_free[fi + d[0] * (fj + d[1] * fk)];
                        }
                    }
                }
            }
            levels.push(CoarseLevel {
                dims: cd,
                w: [vec![0.0; cn], vec![0.0; cn], vec![0.0; cn]],
                dinv: vec![0.0; cn],
                free: free.clone(),
                x: vec![0.0; cn],
                b: vec![0.0; cn],
                r: vec![0.0; cn],
            });
            fine_free = free;
            d = cd;
        }
        Multigrid { fine_dims: dims, levels, tmp: vec![0.0; dims.iter().product()] }
    }

    /// Recomputes all coarse operators from the fine edge weights.
    pub fn update(&mut self, w: &[Vec<f32>; 3]) {
        let mut fd = self.fine_dims;
        for l in 0..self.levels.len() {
            let (prev, rest) = self.levels.split_at_mut(l);
            let fw: &[Vec<f32>; 3] = if l == 0 { w } else { &prev[l - 1].w };
            let lev = &mut rest[0];
            restrict_weights(fd, fw, lev.dims, &mut lev.w);
            let free = &lev.free;
            inverse_diagonal(lev.dims, &lev.w, |n| free[n], &mut lev.dinv);
            fd = lev.dims;
        }
    }

    /// Symmetric V(1,1)-cycle approximating `A⁻¹ b`, written into `x`.
    pub fn vcycle(&mut self, w: &[Vec<f32>; 3], dinv: &[f32], b: &[f32], x: &mut [f32]) {
        x.fill(0.0);
        let fd = self.fine_dims;
        gauss_seidel(fd, w, dinv, x, b, 0);
        gauss_seidel(fd, w, dinv, x, b, 1);
        residual(fd, w, dinv, x, b, &mut self.tmp);
        if self.levels.is_empty() {
            for _ in 0..20 {
                gauss_seidel(fd, w, dinv, x, b, 0);
                gauss_seidel(fd, w, dinv, x, b, 1);
            }
            for _ in 0..20 {
                gauss_seidel(fd, w, dinv, x, b, 1);
                gauss_seidel(fd, w, dinv, x, b, 0);
            }
            return;
        }
        let top = &mut self.levels[0];
        restrict(fd, &self.tmp, top.dims, &mut top.b, &top.free);
        let last = self.levels.len() - 1;
        for l in 0..=last {
            let (head, tail) = self.levels.split_at_mut(l + 1);
            let lev = &mut head[l];
            lev.x.fill(0.0);
            if l == last {
                for _ in 0..10 {
                    gauss_seidel(lev.dims, &lev.w, &lev.dinv, &mut lev.x, &lev.b, 0);
                    gauss_seidel(lev.dims, &lev.w, &lev.dinv, &mut lev.x, &lev.b, 1);
                }
                for _ in 0..10 {
                    gauss_seidel(lev.dims, &lev.w, &lev.dinv, &mut lev.x, &lev.b, 1);
                    gauss_seidel(lev.dims, &lev.w, &lev.dinv, &mut lev.x, &lev.b, 0);
                }
            } else {
                gauss_seidel(lev.dims, &lev.w, &lev.dinv, &mut lev.x, &lev.b, 0);
                gauss_seidel(lev.dims, &lev.w, &lev.dinv, &mut lev.x, &lev.b, 1);
                residual(lev.dims, &lev.w, &lev.dinv, &lev.x, &lev.b, &mut lev.r);
                let next = &mut tail[0];
                restrict(lev.dims, &lev.r, next.dims, &mut next.b, &next.free);
            }
        }
        for l in (0..=last).rev() {
            let (head, tail) = self.levels.split_at_mut(l);
            let lev = &tail[0];
            if l == 0 {
                prolong_add(lev.dims, &lev.x, fd, x, dinv);
            } else {
                let up = &mut head[l - 1];
                prolong_add(lev.dims, &lev.x, up.dims, &mut up.x, &up.dinv);
                gauss_seidel(up.dims, &up.w, &up.dinv, &mut up.x, &up.b, 1);
                gauss_seidel(up.dims, &up.w, &up.dinv, &mut up.x, &up.b, 0);
            }
        }
        gauss_seidel(fd, w, dinv, x, b, 1);
        gauss_seidel(fd, w, dinv, x, b, 0);
    }
}

fn residual(dims: [usize; 3], w: &[Vec<f32>; 3], dinv: &[f32], x: &[f32], b: &[f32], r: &mut [f32]) {
    let lap = Laplacian { dims, w, labels: &[] };
    lap.apply_with(x, |n, ax| {
        r[n] = if dinv[n] != 0.0 { b[n] - ax as f32 } else { 0.0 };
    });
}

fn restrict_weights(fd: [usize; 3], fw: &[Vec<f32>; 3], cd: [usize; 3], cw: &mut [Vec<f32>; 3]) {
    let fidx = |i: usize, j: usize, k: usize| i + fd[0] * (j + fd[1] * k);
    for (axis, out) in cw.iter_mut().enumerate() {
        out.fill(0.0);
        let (t1, t2) = ((axis + 1) % 3, (axis + 2) % 3);
        for k in 0..cd[2] {
            for j in 0..cd[1] {
                for i in 0..cd[0] {
                    let c = [i, j, k];
                    if 2 * c[axis] + 2 >= fd[axis] + 1 || c[axis] + 1 >= cd[axis] {
                        continue;
                    }
                    let mut acc = 0.0f32;
                    for (da, ta) in TW.iter().enumerate() {
                        for (db, tb) in TW.iter().enumerate() {
                            let mut f = [2 * i, 2 * j, 2 * k];
                            let pa = f[t1] as i64 + da as i64 - 1;
                            let pb = f[t2] as i64 + db as i64 - 1;
                            if pa < 0 || pb < 0 || pa as usize >= fd[t1] || pb as usize >= fd[t2] {
                                continue;
                            }
                            f[t1] = pa as usize;
                            f[t2] = pb as usize;
                            if f[axis] + 2 >= fd[axis] {
                                continue;
                            }
                            let wa = fw[axis][fidx(f[0], f[1], f[2])];
                            f[axis] += 1;
                            let wb = fw[axis][fidx(f[0], f[1], f[2])];
                            let s = wa + wb;
                            if s > 0.0 {
                                acc += ta * tb * wa * wb / s;
                            }
                        }
                    }
                    out[i + cd[0] * (j + cd[1] * k)] = acc;
                }
            }
        }
    }
}

fn restrict(fd: [usize; 3], r: &[f32], cd: [usize; 3], b: &mut [f32], free: &[bool]) {
    for k in 0..cd[2] {
        for j in 0..cd[1] {
            for i in 0..cd[0] {
                let n = i + cd[0] * (j + cd[1] * k);
                if !free[n] {
                    b[n] = 0.0;
                    continue;
                }
                let mut acc = 0.0f32;
                for (dk, tk) in TW.iter().enumerate() {
                    let fk = 2 * k + dk;
                    if fk == 0 || fk > fd[2] {
                        continue;
                    }
                    for (dj, tj) in TW.iter().enumerate() {
                        let fj = 2 * j + dj;
                        if fj == 0 || fj > fd[1] {
                            continue;
                        }
                        for (di, ti) in TW.iter().enumerate() {
                            let fi = 2 * i + di;
                            if fi == 0 || fi > fd[0] {
                                continue;
                            }
                            acc += tk * tj * ti * r[(fi - 1) + fd[0] * ((fj - 1) + fd[1] * (fk - 1))];
                        }
                    }
                }
                b[n] = acc;
            }
        }
    }
}

fn prolong_add(cd: [usize; 3], xc: &[f32], fd: [usize; 3], x: &mut [f32], dinv: &[f32]) {
    let split = |i: usize, n: usize| -> (usize, usize, f32) {
        let a = i / 2;
        if i % 2 == 0 || a + 1 >= n {
            (a.min(n - 1), a.min(n - 1), 0.0)
        } else {
            (a, a + 1, 0.5)
        }
    };
    let at = |i: usize, j: usize, k: usize| xc[i + cd[0] * (j + cd[1] * k)];
    for k in 0..fd[2] {
        let (k0, k1, tk) = split(k, cd[2]);
        for j in 0..fd[1] {
            let (j0, j1, tj) = split(j, cd[1]);
            let row = fd[0] * (j + fd[1] * k);
            for i in 0..fd[0] {
                let n = row + i;
                if dinv[n] == 0.0 {
                    continue;
                }
                let (i0, i1, ti) = split(i, cd[0]);
                let x00 = at(i0, j0, k0) + ti * (at(i1, j0, k0) - at(i0, j0, k0));
                let x10 = at(i0, j1, k0) + ti * (at(i1, j1, k0) - at(i0, j1, k0));
                let x01 = at(i0, j0, k1) + ti * (at(i1, j0, k1) - at(i0, j0, k1));
                let x11 = at(i0, j1, k1) + ti * (at(i1, j1, k1) - at(i0, j1, k1));
                let y0 = x00 + tj * (x10 - x00);
                let y1 = x01 + tj * (x11 - x01);
                x[n] += y0 + tk * (y1 - y0);
            }
        }
    }
}

pub(crate) struct PcgBuffers {
    pub r: Vec<f32>,
    pub p: Vec<f32>,
    pub q: Vec<f32>,
    pub z: Vec<f32>,
    pub minv: Vec<f32>,
    pub mg: Option<Multigrid>,
}

impl PcgBuffers {
    pub fn new(dims: [usize; 3], labels: &[u8], multigrid: bool) -> Self {
        let n = labels.len();
        PcgBuffers {
            r: vec![0.0; n],
            p: vec![0.0; n],
            q: vec![0.0; n],
            z: if multigrid { vec![0.0; n] } else { Vec::new() },
            minv: vec![0.0; n],
            mg: multigrid.then(|| Multigrid::new(dims, labels)),
        }
    }
}

pub(crate) struct PcgOutcome {
    pub iterations: usize,
}

/// Approximately solves `A x = r` (the right-hand side is taken from `buf.r`, which is
/// overwritten) starting from `x = 0`, until the preconditioned residual norm has dropped
/// by `rtol` or after `max_iter` steps. The iterates vanish on fixed nodes because the
/// preconditioner does, so the operator needs no masking.
pub(crate) fn pcg(a: &Laplacian<'_>, buf: &mut PcgBuffers, x: &mut [f32], rtol: f64, max_iter: usize) -> PcgOutcome {
    let labels = a.labels;
    inverse_diagonal(a.dims, a.w, |n| labels[n] == FREE, &mut buf.minv);
    if let Some(mg) = buf.mg.as_mut() {
        mg.update(a.w);
    }
    x.fill(0.0);
    let precondition = |buf: &mut PcgBuffers| -> f64 {
        match buf.mg.as_mut() {
            Some(mg) => {
                mg.vcycle(a.w, &buf.minv, &buf.r, &mut buf.z);
                buf.r.iter().zip(&buf.z).map(|(&r, &z)| r as f64 * z as f64).sum()
            }
            None => buf.r.iter().zip(&buf.minv).map(|(&r, &m)| (r as f64) * (r as f64) * m as f64).sum(),
        }
    };
    let mut rz = precondition(buf);
    match &buf.mg {
        Some(_) => buf.p.copy_from_slice(&buf.z),
        None => {
            for ((p, r), m) in buf.p.iter_mut().zip(&buf.r).zip(&buf.minv) {
                *p = r * m;
            }
        }
    }
    let rz0 = rz;
    if rz0 <= 0.0 {
        return PcgOutcome { iterations: 0 };
    }
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let q = &mut buf.q;
        let mut pq = 0.0f64;
        a.apply_with(&buf.p, |n, v| {
            q[n] = v as f32;
            pq += v * buf.p[n] as f64;
        });
        if pq <= 0.0 {
            break;
        }
        let alpha = (rz / pq) as f32;
        for n in 0..x.len() {
            x[n] += alpha * buf.p[n];
            buf.r[n] -= alpha * buf.q[n];
        }
        let rz_new = precondition(buf);
        if rz_new <= rtol * rtol * rz0 {
            break;
        }
        let beta = (rz_new / rz) as f32;
        rz = rz_new;
        match &buf.mg {
            Some(_) => {
                for (p, z) in buf.p.iter_mut().zip(&buf.z) {
                    *p = z + beta * *p;
                }
            }
            None => {
                for n in 0..x.len() {
                    buf.p[n] = buf.r[n] * buf.minv[n] + beta * buf.p[n];
                }
            }
        }
    }
    PcgOutcome { iterations: it }
}
