use std::collections::VecDeque;

use serde::Serialize;

use super::grid::{coarsen, VoxelGrid, C0, C1, FREE};
use super::kernel::{assemble, directional, energy, max_gradient, CellMap, PowerLaw};
use super::linear::{pcg, Laplacian, PcgBuffers};
use super::PdeError;

/// Starting field on the coarsest level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum InitialGuess {
    /// `d₀ / (d₀ + d₁)` with `dᵢ` the lattice distance to plate `i`.
    Linear,
    Constant(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverSettings {
    pub p: f64,
    /// `ε` as a fraction of the largest gradient of the starting field.
    pub eps_rel: f64,
    /// Stop when the energy drops by less than `tol` (relative) over `window` iterations.
    pub tol: f64,
    pub window: usize,
    pub max_iters: usize,
    pub pcg_rtol: f64,
    pub pcg_max_iter: usize,
    /// Multigrid V-cycle preconditioner instead of Jacobi.
    pub multigrid: bool,
    /// Smallest node count worth an extra coarse level.
    pub min_coarse_nodes: usize,
    pub coarse_tol: f64,
    pub init: InitialGuess,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            p: 3.0,
            eps_rel: 1e-6,
            tol: 1e-6,
            window: 2,
            max_iters: 400,
            pcg_rtol: 0.05,
            pcg_max_iter: 60,
            multigrid: true,
            min_coarse_nodes: 20_000,
            coarse_tol: 1e-4,
            init: InitialGuess::Linear,
        }
    }
}

/// Values of the discrete capacity function on the nodes of a grid.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelStats {
    pub h: f64,
    pub nodes: usize,
    pub iterations: usize,
    pub pcg_iterations: usize,
    pub energy: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradStats {
    pub max: f64,
    pub mean: f64,
}

#[derive(Clone, Debug)]
pub struct CapacityResult {
    /// Regularized energy of the final field.
    pub energy: f64,
    /// `E_ε(u) − E_0(u) ≥ 0` at the final field.
    pub eps_bias: f64,
    pub eps: f64,
    pub p: f64,
    pub field: ScalarField,
    pub grid: VoxelGrid,
    pub grad_stats: GradStats,
    pub converged: bool,
    /// Finest-level iterations.
    pub iterations: usize,
    /// Energy after every finest-level iteration, starting with the initial field.
    pub history: Vec<f64>,
    pub levels: Vec<LevelStats>,
    pub u_min: f64,
    pub u_max: f64,
}

impl CapacityResult {
    pub fn ensure_converged(self) -> Result<Self, PdeError> {
        if self.converged {
            Ok(self)
        } else {
            let last = &self.history[self.history.len().saturating_sub(2)..];
            Err(PdeError::NotConverged { iterations: self.iterations, last_decrease: last[0] - last[last.len() - 1] })
        }
    }
}

fn fix_boundary(grid: &VoxelGrid, u: &mut [f64]) {
    for (v, &l) in u.iter_mut().zip(grid.labels()) {
        match l {
            C0 => *v = 0.0,
            C1 => *v = 1.0,
            _ => {}
        }
    }
}

fn lattice_distance(grid: &VoxelGrid, label: u8) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; grid.node_count()];
    let mut queue = VecDeque::new();
    for (n, &l) in grid.labels().iter().enumerate() {
        if l == label {
            dist[n] = 0.0;
            queue.push_back(n);
        }
    }
    while let Some(n) = queue.pop_front() {
        let dn = dist[n] + 1.0;
        grid.for_neighbors(n, |m| {
            if dist[m] > dn {
                dist[m] = dn;
                queue.push_back(m);
            }
        });
    }
    dist
}

fn initial_field(grid: &VoxelGrid, init: InitialGuess) -> Vec<f64> {
    let mut u = match init {
        InitialGuess::Constant(c) => vec![c; grid.node_count()],
        InitialGuess::Linear => {
            let d0 = lattice_distance(grid, C0);
            let d1 = lattice_distance(grid, C1);
            d0.iter().zip(&d1).map(|(a, b)| if a + b > 0.0 { a / (a + b) } else { 0.5 }).collect()
        }
    };
    fix_boundary(grid, &mut u);
    u
}

/// Trilinear interpolation of a coarse field (spacing `2h`, same origin) onto `fine`.
fn prolong(coarse: &VoxelGrid, uc: &[f64], fine: &VoxelGrid) -> Vec<f64> {
    let [cx, cy, cz] = coarse.dims();
    let [fx, fy, fz] = fine.dims();
    let mut u = vec![0.0; fine.node_count()];
    let split = |i: usize, n: usize| -> (usize, usize, f64) {
        let a = (i / 2).min(n - 1);
        if i % 2 == 0 || a + 1 >= n {
            (a, a, 0.0)
        } else {
            (a, a + 1, 0.5)
        }
    };
    for k in 0..fz {
        let (k0, k1, tk) = split(k, cz);
        for j in 0..fy {
            let (j0, j1, tj) = split(j, cy);
            for i in 0..fx {
                let (i0, i1, ti) = split(i, cx);
                let at = |a, b, c| uc[coarse.index(a, b, c)];
                let x00 = at(i0, j0, k0) * (1.0 - ti) + at(i1, j0, k0) * ti;
                let x10 = at(i0, j1, k0) * (1.0 - ti) + at(i1, j1, k0) * ti;
                let x01 = at(i0, j0, k1) * (1.0 - ti) + at(i1, j0, k1) * ti;
                let x11 = at(i0, j1, k1) * (1.0 - ti) + at(i1, j1, k1) * ti;
                let y0 = x00 * (1.0 - tj) + x10 * tj;
                let y1 = x01 * (1.0 - tj) + x11 * tj;
                u[fine.index(i, j, k)] = y0 * (1.0 - tk) + y1 * tk;
            }
        }
    }
    fix_boundary(fine, &mut u);
    u
}

struct LevelOutcome {
    u: Vec<f64>,
    energy: f64,
    eps: f64,
    history: Vec<f64>,
    stats: LevelStats,
}

/// Safeguarded Newton search for the minimizer of the convex `α ↦ E(u + α d)`.
/// Returns the best evaluated step and its energy (`0` and `e0` if nothing improves).
fn line_search(cells: &CellMap, u: &[f64], d: &[f32], law: &PowerLaw, h: f64, e0: f64, slope0: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut best = (0.0, e0);
    let mut alpha = 1.0;
    for _ in 0..6 {
        let (g, g1, g2) = directional(cells, u, d, alpha, law, h);
        if g < best.1 {
            best = (alpha, g);
        }
        if g1 < 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        if g1.abs() <= 0.05 * slope0.abs() {
            break;
        }
        let mut next = if g2 > 0.0 { alpha - g1 / g2 } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * alpha };
        }
        if (next - alpha).abs() <= 1e-3 * alpha {
            break;
        }
        alpha = next;
    }
    best
}

fn solve_level(grid: &VoxelGrid, mut u: Vec<f64>, s: &SolverSettings, tol: f64) -> LevelOutcome {
    let h = grid.h();
    let n = grid.node_count();
    let cells = CellMap::new(grid);
    let eps = s.eps_rel * max_gradient(&cells, &u, h);
    let law = PowerLaw::new(s.p, eps);
    let fixed = cells.fixed_energy(&u, &law, h);
    let mut w = [vec![0.0f32; n], vec![0.0f32; n], vec![0.0f32; n]];
    let mut buf = PcgBuffers::new(grid.dims(), grid.labels(), s.multigrid);
    let mut d = vec![0.0f32; n];
    let mut e = fixed + assemble(&cells, &u, &law, h, &mut w);
    let mut history = vec![e];
    let mut converged = false;
    let mut pcg_total = 0;
    let mut it = 0;
    while it < s.max_iters {
        it += 1;
        let lap = Laplacian { dims: grid.dims(), w: &w, labels: grid.labels() };
        if lap.neg_gradient(&u, &mut buf.r) == 0.0 {
            converged = true;
            break;
        }
        let rhs = buf.r.clone();
        let out = pcg(&lap, &mut buf, &mut d, s.pcg_rtol, s.pcg_max_iter);
        pcg_total += out.iterations;
        let slope0: f64 = -rhs.iter().zip(&d).map(|(&r, &x)| r as f64 * x as f64).sum::<f64>();
        if slope0 >= 0.0 {
            converged = true;
            break;
        }
        let (alpha, _) = line_search(&cells, &u, &d, &law, h, e - fixed, slope0);
        if alpha == 0.0 {
            converged = true;
            break;
        }
        for ((x, &dx), &l) in u.iter_mut().zip(&d).zip(grid.labels()) {
            if l == FREE {
                *x += alpha * dx as f64;
            }
        }
        e = fixed + assemble(&cells, &u, &law, h, &mut w);
        history.push(e);
        if history.len() > s.window {
            let prev = history[history.len() - 1 - s.window];
            if (prev - e) <= tol * e.abs() {
                converged = true;
                break;
            }
        }
    }
    let stats = LevelStats { h, nodes: n, iterations: it, pcg_iterations: pcg_total, energy: e, converged };
    LevelOutcome { u, energy: e, eps, history, stats }
}

/// Minimizes the regularized discrete p-energy with `u = 0` on `C0`, `u = 1` on `C1` and
/// natural boundary conditions on the box, by nested iteration over coarsened copies of
/// the grid.
pub fn solve_capacity(grid: &VoxelGrid, settings: &SolverSettings) -> Result<CapacityResult, PdeError> {
    if !(settings.p > 1.0) {
        return Err(PdeError::BadExponent(settings.p));
    }
    grid.validate()?;
    let mut levels = vec![grid.clone()];
    loop {
        let last = levels.last().unwrap();
        if last.node_count() / 8 < settings.min_coarse_nodes || last.dims().iter().any(|&d| d < 9) {
            break;
        }
        match coarsen(last) {
            Some(c) if c.validate().is_ok() => levels.push(c),
            _ => break,
        }
    }
    let mut stats = Vec::new();
    let coarsest = levels.last().unwrap();
    let mut u = initial_field(coarsest, settings.init);
    let mut outcome = None;
    for (li, g) in levels.iter().enumerate().rev() {
        if let Some(prev) = outcome.take() {
            let LevelOutcome { u: uc, .. } = prev;
            u = prolong(&levels[li + 1], &uc, g);
        }
        let tol = if li == 0 { settings.tol } else { settings.coarse_tol.max(settings.tol) };
        let out = solve_level(g, std::mem::take(&mut u), settings, tol);
        stats.push(out.stats.clone());
        outcome = Some(out);
    }
    let out = outcome.unwrap();
    let cells = CellMap::new(grid);
    let h = grid.h();
    let law0 = PowerLaw::new(settings.p, 0.0);
    let e0 = cells.fixed_energy(&out.u, &law0, h) + energy(&cells, &out.u, &law0, h);
    let grad_stats = gradient_stats(&cells, &out.u, h);
    let (u_min, u_max) = out.u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let fine = stats.last().unwrap();
    Ok(CapacityResult {
        energy: out.energy,
        eps_bias: out.energy - e0,
        eps: out.eps,
        p: settings.p,
        converged: fine.converged,
        iterations: fine.iterations,
        history: out.history,
        levels: stats,
        grid: grid.clone(),
        field: ScalarField { values: out.u },
        grad_stats,
        u_min,
        u_max,
    })
}

fn gradient_stats(cells: &CellMap, u: &[f64], h: f64) -> GradStats {
    let max = max_gradient(cells, u, h);
    let [nx, ny, nz] = cells.dims;
    let vol = ((nx - 1) * (ny - 1) * (nz - 1)) as f64 * h * h * h;
    let mut sum = 0.0;
    let o = cells.offsets;
    super::kernel::for_each_cell(cells.dims, |base| {
        if cells.active[base] {
            let e = super::kernel::edge_diffs(&o.map(|off| u[base + off]));
            for m in 0..8 {
                sum += super::kernel::corner_sq(&e, m).sqrt();
            }
        }
    });
    GradStats { max, mean: sum / 8.0 * h * h / vol }
}
