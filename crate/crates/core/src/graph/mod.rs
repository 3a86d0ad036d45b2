//! Discrete p-modulus of connecting path families and of separating cut families on
//! weighted graphs.
//!
//! An edge `e` carries a length `σ_e` and a cross-sectional area `a_e`. A density `ρ ≥ 0`
//! has energy `Σ ρ_e^p σ_e a_e`; a path has length `Σ ρ_e σ_e` and a cut has area
//! `Σ ρ_e a_e`. With unit areas this is the plain `σ`-weighted modulus. Keeping the two
//! measures apart makes path and cut moduli exactly dual for conjugate exponents.

mod flow;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::Vec3;
use crate::pde::{GridBox, VoxelGrid};

pub use flow::MaxFlow;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge {0} is a self-loop")]
    SelfLoop(usize),
    #[error("edge {0} has a non-positive or non-finite measure")]
    BadMeasure(usize),
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("terminal set {0} is empty")]
    EmptyTerminals(&'static str),
    #[error("vertex {0} is in both terminal sets")]
    OverlappingTerminals(usize),
    #[error("terminal sets are not connected")]
    NotConnected,
    #[error("exponent must exceed 1, got {0}")]
    BadExponent(f64),
    #[error("exponents {0} and {1} are not conjugate")]
    ExponentMismatch(f64, f64),
    #[error("solutions belong to different families or graphs")]
    IncompatibleSolutions,
    #[error("graph file: {0}")]
    Parse(String),
    #[error("empty box or bad spacing")]
    EmptyBox,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub sigma: f64,
    pub area: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedGraph {
    vertices: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl WeightedGraph {
    pub fn new(vertices: usize) -> Self {
        WeightedGraph { vertices, edges: Vec::new(), adjacency: vec![Vec::new(); vertices] }
    }

    /// Adds an edge of length `sigma` and unit area.
    pub fn add_edge(&mut self, u: usize, v: usize, sigma: f64) -> Result<usize, GraphError> {
        self.add_edge_with_area(u, v, sigma, 1.0)
    }

    pub fn add_edge_with_area(&mut self, u: usize, v: usize, sigma: f64, area: f64) -> Result<usize, GraphError> {
        let id = self.edges.len();
        if u >= self.vertices {
            return Err(GraphError::VertexOutOfRange(u));
        }
        if v >= self.vertices {
            return Err(GraphError::VertexOutOfRange(v));
        }
        if u == v {
            return Err(GraphError::SelfLoop(id));
        }
        if !(sigma > 0.0 && sigma.is_finite() && area > 0.0 && area.is_finite()) {
            return Err(GraphError::BadMeasure(id));
        }
        self.edges.push(Edge { u, v, sigma, area });
        self.adjacency[u].push((v, id));
        self.adjacency[v].push((u, id));
        Ok(id)
    }

    /// Appends an isolated vertex and returns its index.
    pub fn add_vertex(&mut self) -> usize {
        self.vertices += 1;
        self.adjacency.push(Vec::new());
        self.vertices - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Disjoint union; vertices of `other` are shifted by `self.vertex_count()`.
    pub fn disjoint_union(&self, other: &WeightedGraph) -> WeightedGraph {
        let shift = self.vertices;
        let mut g = WeightedGraph::new(self.vertices + other.vertices);
        for e in self.edges.iter() {
            g.push_unchecked(*e);
        }
        for e in other.edges.iter() {
            g.push_unchecked(Edge { u: e.u + shift, v: e.v + shift, ..*e });
        }
        g
    }

    /// Same graph with edges listed in the order given by `perm` (new edge `i` is old `perm[i]`).
    pub fn permuted_edges(&self, perm: &[usize]) -> WeightedGraph {
        let mut g = WeightedGraph::new(self.vertices);
        for &i in perm {
            g.push_unchecked(self.edges[i]);
        }
        g
    }

    fn push_unchecked(&mut self, e: Edge) {
        let id = self.edges.len();
        self.adjacency[e.u].push((e.v, id));
        self.adjacency[e.v].push((e.u, id));
        self.edges.push(e);
    }

    /// Parses `vertices=N` followed by lines `u v sigma [area]`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| GraphError::Parse("missing header".into()))?;
        let n = header
            .strip_prefix("vertices=")
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| GraphError::Parse(format!("bad header `{header}`")))?;
        let mut g = WeightedGraph::new(n);
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if !(3..=4).contains(&f.len()) {
                return Err(GraphError::Parse(format!("bad edge line `{line}`")));
            }
            let bad = |_| GraphError::Parse(format!("bad edge line `{line}`"));
            let u = f[0].parse::<usize>().map_err(bad)?;
            let v = f[1].parse::<usize>().map_err(bad)?;
            let sigma = f[2].parse::<f64>().map_err(|_| GraphError::Parse(format!("bad edge line `{line}`")))?;
            let area = match f.get(3) {
                Some(a) => a.parse::<f64>().map_err(|_| GraphError::Parse(format!("bad edge line `{line}`")))?,
                None => 1.0,
            };
            g.add_edge_with_area(u, v, sigma, area)?;
        }
        Ok(g)
    }

    /// Inverse of [`WeightedGraph::parse`]; the area column is written only when some area
    /// differs from 1.
    pub fn to_text(&self) -> String {
        let with_area = self.edges.iter().any(|e| e.area != 1.0);
        let mut s = format!("vertices={}\n", self.vertices);
        for e in &self.edges {
            if with_area {
                let _ = writeln!(s, "{} {} {:e} {:e}", e.u, e.v, e.sigma, e.area);
            } else {
                let _ = writeln!(s, "{} {} {:e}", e.u, e.v, e.sigma);
            }
        }
        s
    }

    fn check_terminals(&self, s: &[usize], t: &[usize]) -> Result<(Vec<bool>, Vec<bool>), GraphError> {
        if s.is_empty() {
            return Err(GraphError::EmptyTerminals("S"));
        }
        if t.is_empty() {
            return Err(GraphError::EmptyTerminals("T"));
        }
        let mut in_s = vec![false; self.vertices];
        let mut in_t = vec![false; self.vertices];
        for &v in s {
            *in_s.get_mut(v).ok_or(GraphError::VertexOutOfRange(v))? = true;
        }
        for &v in t {
            if v >= self.vertices {
                return Err(GraphError::VertexOutOfRange(v));
            }
            if in_s[v] {
                return Err(GraphError::OverlappingTerminals(v));
            }
            in_t[v] = true;
        }
        let mut seen = in_s.clone();
        let mut queue: VecDeque<usize> = s.iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            if in_t[x] {
                return Ok((in_s, in_t));
            }
            for &(y, _) in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        Err(GraphError::NotConnected)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Paths joining `S` to `T`.
    Connecting,
    /// Edge sets whose removal separates `S` from `T`.
    Cut,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusSolution {
    pub family: Family,
    pub p: f64,
    /// `Σ ρ_e^p σ_e a_e`.
    pub value: f64,
    /// Lagrangian lower bound on the modulus of the active constraints.
    pub dual_value: f64,
    pub density: Vec<f64>,
    /// Edge lists of the generated paths or cuts.
    pub active_constraints: Vec<Vec<usize>>,
    /// `1 −` the smallest path length (or cut area) under `ρ`.
    pub residual: f64,
    pub iterations: usize,
}

impl ModulusSolution {
    /// `{value, residual, iterations, density: [[edge_index, rho]]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let density: Vec<(usize, f64)> = self.density.iter().copied().enumerate().collect();
        serde_json::json!({
            "value": self.value,
            "residual": self.residual,
            "iterations": self.iterations,
            "density": density,
        })
    }
}

/// Stopping rule for [`connecting_modulus`] and [`cut_modulus`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModulusSettings {
    /// Largest allowed residual `1 − min length`.
    pub tol: f64,
    /// Largest relative value change over `window` outer iterations.
    pub value_rtol: f64,
    pub window: usize,
    pub max_iterations: usize,
    /// Cap on coordinate-ascent sweeps per outer iteration.
    pub max_sweeps: usize,
}

impl Default for ModulusSettings {
    fn default() -> Self {
        ModulusSettings { tol: 1e-6, value_rtol: 1e-9, window: 10, max_iterations: 100_000, max_sweeps: 2_000 }
    }
}

impl ModulusSettings {
    pub fn with_tol(tol: f64) -> Self {
        ModulusSettings { tol, ..Default::default() }
    }
}

/// Restricted convex program `min Σ w_e ρ_e^p` subject to `Σ_e N_γe ρ_e ≥ 1` over the active
/// constraints, solved on its dual by exact coordinate ascent.
struct Restricted {
    p: f64,
    w: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    lambda: Vec<f64>,
    /// `t = Nᵀλ`.
    t: Vec<f64>,
}

impl Restricted {
    fn rho(&self, e: usize) -> f64 {
        rho_of(self.t[e], self.w[e], self.p)
    }

    fn row_length(&self, row: &[(usize, f64)]) -> f64 {
        row.iter().map(|&(e, n)| n * self.rho(e)).sum()
    }

    /// Sets `λ_γ` to maximize the dual along that coordinate.
    fn update(&mut self, g: usize) -> f64 {
        let old = self.lambda[g];
        let row = &self.rows[g];
        let base: Vec<f64> = row.iter().map(|&(e, n)| (self.t[e] - old * n).max(0.0)).collect();
        let p = self.p;
        let w = &self.w;
        let f = |x: f64| -> (f64, f64) {
            let mut val = 0.0;
            let mut der = 0.0;
            for (&(e, n), &b) in row.iter().zip(&base) {
                let r = rho_of(b + x * n, w[e], p);
                val += n * r;
                if r > 0.0 {
                    der += n * n * r / ((p - 1.0) * (b + x * n));
                }
            }
            (val, der)
        };
        let new = if f(0.0).0 >= 1.0 {
            0.0
        } else {
            let mut lo = 0.0;
            let mut hi = old.max(1e-300) * 2.0;
            while f(hi).0 < 1.0 {
                lo = hi;
                hi *= 2.0;
            }
            let mut x = if old > lo && old < hi { old } else { 0.5 * (lo + hi) };
            for _ in 0..200 {
                let (v, d) = f(x);
                if v < 1.0 {
                    lo = x;
                } else {
                    hi = x;
                }
                let mut next = if d > 0.0 { x - (v - 1.0) / d } else { f64::NAN };
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                if (next - x).abs() <= 1e-15 * x.abs() || hi - lo <= 1e-15 * hi {
                    x = next;
                    break;
                }
                x = next;
            }
            x
        };
        for (&(e, n), &b) in row.iter().zip(&base) {
            self.t[e] = b + new * n;
        }
        self.lambda[g] = new;
        (new - old).abs() / new.max(old).max(f64::MIN_POSITIVE)
    }

    /// Sweeps until every active constraint satisfies KKT to `tol` or the sweep cap is hit.
    fn solve(&mut self, tol: f64, max_sweeps: usize) {
        for _ in 0..max_sweeps {
            for g in 0..self.rows.len() {
                self.update(g);
            }
            let worst = (0..self.rows.len())
                .map(|g| {
                    let slack = self.row_length(&self.rows[g]) - 1.0;
                    if self.lambda[g] > 0.0 {
                        slack.abs()
                    } else {
                        (-slack).max(0.0)
                    }
                })
                .fold(0.0, f64::max);
            if worst <= tol {
                break;
            }
        }
    }

    fn value(&self) -> f64 {
        (0..self.w.len()).map(|e| self.w[e] * self.rho(e).powf(self.p)).sum()
    }

    fn dual(&self) -> f64 {
        self.lambda.iter().sum::<f64>() - (self.p - 1.0) * self.value()
    }
}

fn rho_of(t: f64, w: f64, p: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = t / (p * w);
    if p == 3.0 {
        x.sqrt()
    } else if p == 2.0 {
        x
    } else if p == 1.5 {
        x * x
    } else {
        x.powf(1.0 / (p - 1.0))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest `S–T` path under edge lengths `len`, as `(length, edges)`. Ties go to the
/// smaller vertex index.
fn shortest_path(g: &WeightedGraph, in_s: &[bool], in_t: &[bool], len: &[f64]) -> (f64, Vec<usize>) {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for v in 0..n {
        if in_s[v] {
            dist[v] = 0.0;
            heap.push(HeapItem(0.0, v));
        }
    }
    let mut done = vec![false; n];
    while let Some(HeapItem(d, x)) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        if in_t[x] {
            let mut edges = Vec::new();
            let mut y = x;
            while let Some((prev, e)) = pred[y] {
                edges.push(e);
                y = prev;
            }
            edges.reverse();
            return (d, edges);
        }
        for &(y, e) in g.neighbors(x) {
            let nd = d + len[e];
            if nd < dist[y] || (nd == dist[y] && !done[y] && pred[y].is_some_and(|(p, _)| x < p)) {
                dist[y] = nd;
                pred[y] = Some((x, e));
                heap.push(HeapItem(nd, y));
            }
        }
    }
    (f64::INFINITY, Vec::new())
}

/// Minimum `S–T` edge cut under capacities `cap`, as `(capacity, edges)`: the edges leaving
/// the set reachable from `S` in the final residual network.
fn minimum_cut(g: &WeightedGraph, in_s: &[bool], in_t: &[bool], cap: &[f64]) -> (f64, Vec<usize>) {
    let n = g.vertex_count();
    let (source, sink) = (n, n + 1);
    let mut flow = MaxFlow::new(n + 2);
    let big = cap.iter().sum::<f64>() * 4.0 + 1.0;
    for v in 0..n {
        if in_s[v] {
            flow.add_edge(source, v, big, 0.0);
        }
        if in_t[v] {
            flow.add_edge(v, sink, big, 0.0);
        }
    }
    for (e, edge) in g.edges().iter().enumerate() {
        flow.add_edge(edge.u, edge.v, cap[e], cap[e]);
    }
    flow.run(source, sink);
    let reach = flow.source_side(source);
    let mut edges = Vec::new();
    let mut total = 0.0;
    for (e, edge) in g.edges().iter().enumerate() {
        if reach[edge.u] != reach[edge.v] {
            edges.push(e);
            total += cap[e];
        }
    }
    (total, edges)
}

fn solve_family(
    g: &WeightedGraph,
    s: &[usize],
    t: &[usize],
    p: f64,
    settings: &ModulusSettings,
    family: Family,
) -> Result<ModulusSolution, GraphError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(GraphError::BadExponent(p));
    }
    let (in_s, in_t) = g.check_terminals(s, t)?;
    let edges = g.edges();
    let usage: Vec<f64> = match family {
        Family::Connecting => edges.iter().map(|e| e.sigma).collect(),
        Family::Cut => edges.iter().map(|e| e.area).collect(),
    };
    let mut prog = Restricted {
        p,
        w: edges.iter().map(|e| e.sigma * e.area).collect(),
        rows: Vec::new(),
        lambda: Vec::new(),
        t: vec![0.0; edges.len()],
    };
    let mut active = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let inner_tol = 0.1 * settings.tol;
    while iterations < settings.max_iterations {
        iterations += 1;
        let rho: Vec<f64> = (0..edges.len()).map(|e| prog.rho(e)).collect();
        let weights: Vec<f64> = rho.iter().zip(&usage).map(|(r, u)| r * u).collect();
        let (shortest, constraint) = match family {
            Family::Connecting => shortest_path(g, &in_s, &in_t, &weights),
            Family::Cut => minimum_cut(g, &in_s, &in_t, &weights),
        };
        residual = 1.0 - shortest;
        let value = prog.value();
        history.push(value);
        if residual <= settings.tol {
            let w = settings.window;
            if history.len() > w {
                let prev = history[history.len() - 1 - w];
                if (value - prev).abs() <= settings.value_rtol * value.abs() {
                    break;
                }
            }
        } else if !active.contains(&constraint) {
            prog.rows.push(constraint.iter().map(|&e| (e, usage[e])).collect());
            prog.lambda.push(0.0);
            active.push(constraint);
        }
        prog.solve(inner_tol.max(0.1 * residual), settings.max_sweeps);
    }
    let density: Vec<f64> = (0..edges.len()).map(|e| prog.rho(e)).collect();
    let value = density.iter().zip(edges).map(|(r, e)| r.powf(p) * e.sigma * e.area).sum();
    Ok(ModulusSolution {
        family,
        p,
        value,
        dual_value: prog.dual(),
        density,
        active_constraints: active,
        residual,
        iterations,
    })
}

/// p-modulus of the family of paths joining `s` to `t`, by constraint generation with a
/// shortest-path oracle.
pub fn connecting_modulus(
    g: &WeightedGraph,
    s: &[usize],
    t: &[usize],
    p: f64,
    settings: &ModulusSettings,
) -> Result<ModulusSolution, GraphError> {
    solve_family(g, s, t, p, settings, Family::Connecting)
}

/// q-modulus of the family of edge cuts separating `s` from `t`, by constraint generation
/// with a minimum-cut oracle.
pub fn cut_modulus(
    g: &WeightedGraph,
    s: &[usize],
    t: &[usize],
    q: f64,
    settings: &ModulusSettings,
) -> Result<ModulusSolution, GraphError> {
    solve_family(g, s, t, q, settings, Family::Cut)
}

/// `Mod_p(paths)^{1/p} · Mod_q(cuts)^{1/q}` for conjugate exponents.
pub fn duality_product(mp: &ModulusSolution, mq: &ModulusSolution) -> Result<f64, GraphError> {
    if mp.family != Family::Connecting || mq.family != Family::Cut || mp.density.len() != mq.density.len() {
        return Err(GraphError::IncompatibleSolutions);
    }
    if (1.0 / mp.p + 1.0 / mq.p - 1.0).abs() > 1e-12 {
        return Err(GraphError::ExponentMismatch(mp.p, mq.p));
    }
    Ok(mp.value.powf(1.0 / mp.p) * mq.value.powf(1.0 / mq.p))
}

/// Conjugate exponent `p / (p − 1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Length and area of a lattice edge of spacing `h`. The area is the face of the dual cell
/// crossed by the edge, halved once for each transverse direction in which the edge lies on
/// the box boundary. With these measures a density `ρ` on edges has energy
/// `Σ ρ^p σ a ≈ ∫ ρ^p`, path lengths approximate `∫_γ ρ` and cut areas approximate
/// `∫_Σ ρ`, in every dimension-3 box.
pub fn lattice_edge_measure(h: f64, on_boundary: [bool; 2]) -> (f64, f64) {
    let mut area = h * h;
    for b in on_boundary {
        if b {
            area *= 0.5;
        }
    }
    (h, area)
}

/// A 6-neighbour lattice graph with the vertex coordinates.
#[derive(Clone, Debug)]
pub struct GridGraph {
    pub graph: WeightedGraph,
    pub coords: Vec<Vec3>,
    pub dims: [usize; 3],
}

/// Lattice graph on the nodes of `VoxelGrid::new(b, h)`, with edge measures from
/// [`lattice_edge_measure`].
pub fn build_grid_graph(b: &GridBox, h: f64) -> Result<GridGraph, GraphError> {
    let grid = VoxelGrid::new(b, h).map_err(|_| GraphError::EmptyBox)?;
    let dims = grid.dims();
    let n = grid.node_count();
    let mut g = WeightedGraph::new(n);
    let coords = (0..n).map(|i| {
        let [x, y, z] = grid.ijk(i);
        grid.position(x, y, z)
    });
    let coords: Vec<Vec3> = coords.collect();
    let edge_face = |c: usize, d: usize| c == 0 || c + 1 == dims[d];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let idx = [i, j, k];
                let here = grid.index(i, j, k);
                for axis in 0..3 {
                    if idx[axis] + 1 >= dims[axis] {
                        continue;
                    }
                    let mut next = idx;
                    next[axis] += 1;
                    let (t1, t2) = ((axis + 1) % 3, (axis + 2) % 3);
                    let (sigma, area) =
                        lattice_edge_measure(h, [edge_face(idx[t1], t1), edge_face(idx[t2], t2)]);
                    g.add_edge_with_area(here, grid.index(next[0], next[1], next[2]), sigma, area)?;
                }
            }
        }
    }
    Ok(GridGraph { graph: g, coords, dims })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ring_capacity_exact;

    fn settings() -> ModulusSettings {
        ModulusSettings::default()
    }

    fn parallel(k: usize) -> WeightedGraph {
        let mut g = WeightedGraph::new(2);
        for _ in 0..k {
            g.add_edge(0, 1, 1.0).unwrap();
        }
        g
    }

    fn series(m: usize) -> WeightedGraph {
        let mut g = WeightedGraph::new(m + 1);
        for i in 0..m {
            g.add_edge(i, i + 1, 1.0).unwrap();
        }
        g
    }

    #[test]
    fn single_edge() {
        let g = parallel(1);
        for p in [1.5, 2.0, 3.0] {
            let m = connecting_modulus(&g, &[0], &[1], p, &settings()).unwrap();
            assert!((m.value - 1.0).abs() < 1e-9);
            assert!((m.density[0] - 1.0).abs() < 1e-9);
            let c = cut_modulus(&g, &[0], &[1], conjugate(p), &settings()).unwrap();
            assert!((c.value - 1.0).abs() < 1e-9);
            assert!((duality_product(&m, &c).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn parallel_and_series_closed_forms() {
        for k in 1..6 {
            let g = parallel(k);
            let m = connecting_modulus(&g, &[0], &[1], 3.0, &settings()).unwrap();
            assert!((m.value - k as f64).abs() < 1e-9 * k as f64);
            let c = cut_modulus(&g, &[0], &[1], 1.5, &settings()).unwrap();
            assert!((c.value - (k as f64).powf(-0.5)).abs() < 1e-9);
            assert!((duality_product(&m, &c).unwrap() - 1.0).abs() < 1e-9);
        }
        for m in 1..6 {
            let g = series(m);
            let p = connecting_modulus(&g, &[0], &[m], 3.0, &settings()).unwrap();
            assert!((p.value - (m as f64).powi(-2)).abs() < 1e-9);
            let c = cut_modulus(&g, &[0], &[m], 1.5, &settings()).unwrap();
            assert!((c.value - m as f64).abs() < 1e-9 * m as f64);
            assert!((duality_product(&p, &c).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    /// Effective conductance with conductances `a/σ`, by a dense Laplacian solve.
    fn conductance(g: &WeightedGraph, s: &[usize], t: &[usize]) -> f64 {
        let n = g.vertex_count();
        let fixed: Vec<Option<f64>> =
            (0..n).map(|v| if s.contains(&v) { Some(0.0) } else if t.contains(&v) { Some(1.0) } else { None }).collect();
        let free: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();
        let pos: Vec<Option<usize>> = {
            let mut p = vec![None; n];
            for (i, &v) in free.iter().enumerate() {
                p[v] = Some(i);
            }
            p
        };
        let m = free.len();
        let mut a = nalgebra::DMatrix::<f64>::zeros(m, m);
        let mut b = nalgebra::DVector::<f64>::zeros(m);
        for e in g.edges() {
            let c = e.area / e.sigma;
            for (x, y) in [(e.u, e.v), (e.v, e.u)] {
                if let Some(i) = pos[x] {
                    a[(i, i)] += c;
                    match pos[y] {
                        Some(j) => a[(i, j)] -= c,
                        None => b[i] += c * fixed[y].unwrap(),
                    }
                }
            }
        }
        let u = a.lu().solve(&b).unwrap();
        let val = |v: usize| fixed[v].unwrap_or_else(|| u[pos[v].unwrap()]);
        g.edges().iter().map(|e| e.area / e.sigma * (val(e.u) - val(e.v)).powi(2)).sum()
    }

    fn wheel() -> WeightedGraph {
        let mut g = WeightedGraph::new(7);
        let spokes = [1.0, 0.7, 1.3, 0.9, 1.1, 0.8];
        for (i, s) in spokes.iter().enumerate() {
            g.add_edge_with_area(0, i + 1, *s, 1.0 + 0.1 * i as f64).unwrap();
            g.add_edge(i + 1, (i + 1) % 6 + 1, 0.5 + 0.2 * i as f64).unwrap();
        }
        g
    }

    #[test]
    fn quadratic_modulus_is_effective_conductance() {
        let g = wheel();
        let m = connecting_modulus(&g, &[0], &[3, 4], 2.0, &settings()).unwrap();
        let c = conductance(&g, &[0], &[3, 4]);
        assert!((m.value - c).abs() < 1e-5 * c, "{} vs {}", m.value, c);
        let cut = cut_modulus(&g, &[0], &[3, 4], 2.0, &settings()).unwrap();
        assert!((cut.value - 1.0 / c).abs() < 1e-5 / c);
    }

    #[test]
    fn admissibility_and_value_invariants() {
        let g = wheel();
        let m = connecting_modulus(&g, &[0], &[3], 3.0, &settings()).unwrap();
        assert!(m.residual <= 1e-6);
        for path in &m.active_constraints {
            let len: f64 = path.iter().map(|&e| m.density[e] * g.edges()[e].sigma).sum();
            assert!(len >= 1.0 - 1e-6);
        }
        let again: f64 = m.density.iter().zip(g.edges()).map(|(r, e)| r.powi(3) * e.sigma * e.area).sum();
        assert!((m.value - again).abs() <= 1e-12 * m.value);
        assert!(m.dual_value <= m.value * (1.0 + 1e-9));
    }

    #[test]
    fn errors() {
        let g = series(2);
        assert_eq!(connecting_modulus(&g, &[0], &[2], 1.0, &settings()).unwrap_err(), GraphError::BadExponent(1.0));
        assert_eq!(connecting_modulus(&g, &[], &[2], 3.0, &settings()).unwrap_err(), GraphError::EmptyTerminals("S"));
        assert_eq!(connecting_modulus(&g, &[0], &[0], 3.0, &settings()).unwrap_err(), GraphError::OverlappingTerminals(0));
        let mut split = series(1);
        let lone = split.add_vertex();
        assert_eq!(cut_modulus(&split, &[0], &[lone], 1.5, &settings()).unwrap_err(), GraphError::NotConnected);
        let mut bad = WeightedGraph::new(2);
        assert_eq!(bad.add_edge(0, 0, 1.0), Err(GraphError::SelfLoop(0)));
        assert_eq!(bad.add_edge(0, 1, 0.0), Err(GraphError::BadMeasure(0)));
        let m = connecting_modulus(&g, &[0], &[2], 3.0, &settings()).unwrap();
        assert_eq!(duality_product(&m, &m), Err(GraphError::IncompatibleSolutions));
        let c = cut_modulus(&g, &[0], &[2], 2.0, &settings()).unwrap();
        assert_eq!(duality_product(&m, &c), Err(GraphError::ExponentMismatch(3.0, 2.0)));
    }

    #[test]
    fn text_round_trip() {
        let g = wheel();
        assert_eq!(WeightedGraph::parse(&g.to_text()).unwrap(), g);
        let plain = WeightedGraph::parse("vertices=3\n0 1 1.5\n1 2 2 # comment\n").unwrap();
        assert_eq!(plain.edges()[1], Edge { u: 1, v: 2, sigma: 2.0, area: 1.0 });
        assert!(WeightedGraph::parse("nodes=3\n").is_err());
        assert!(WeightedGraph::parse("vertices=2\n0 5 1\n").is_err());
    }

    #[test]
    fn grid_graph_counts() {
        let g = build_grid_graph(&GridBox::cube(0.0, 1.0).unwrap(), 0.5).unwrap();
        assert_eq!(g.graph.vertex_count(), 27);
        assert_eq!(g.graph.edges().len(), 54);
        let g = build_grid_graph(&GridBox::cube(0.0, 1.0).unwrap(), 0.25).unwrap();
        assert_eq!(g.graph.vertex_count(), 125);
        assert!(build_grid_graph(&GridBox::cube(0.0, 1.0).unwrap(), 0.0).is_err());
    }

    /// A slab between two faces of a box has modulus `A / L^{p−1}`; the lattice reproduces
    /// it exactly because the dual-cell areas tile each cross-section.
    #[test]
    fn lattice_measure_reproduces_slab() {
        let b = GridBox::new(Vec3::zeros(), Vec3::new(1.5, 1.0, 0.5)).unwrap();
        let gg = build_grid_graph(&b, 0.25).unwrap();
        let bottom: Vec<usize> = (0..gg.coords.len()).filter(|&i| gg.coords[i].z < 1e-9).collect();
        let top: Vec<usize> = (0..gg.coords.len()).filter(|&i| gg.coords[i].z > 0.5 - 1e-9).collect();
        for p in [2.0, 3.0] {
            let m = connecting_modulus(&gg.graph, &bottom, &top, p, &settings()).unwrap();
            let exact = 1.5 / 0.5f64.powf(p - 1.0);
            assert!((m.value - exact).abs() < 1e-5 * exact, "p={p}: {} vs {exact}", m.value);
        }
    }

    /// The quadratic lattice modulus is isotropic, so on the ring it tracks the continuum
    /// 2-capacity `4πab/(b−a)` up to the coarse voxelization of the terminals. For `p = 3`
    /// lattice paths are measured in the ℓ¹ norm, which lies between the Euclidean norm and
    /// `√3` times it, so the lattice value sits between `3^{-3/2}` times the exact ring
    /// capacity and the exact value.
    #[test]
    fn lattice_measure_on_ring() {
        let (a, bb) = (0.5, 1.5);
        let b = GridBox::cube(-1.75, 1.75).unwrap();
        let gg = build_grid_graph(&b, 0.25).unwrap();
        let inner: Vec<usize> = (0..gg.coords.len()).filter(|&i| gg.coords[i].norm() <= a + 1e-9).collect();
        let outer: Vec<usize> = (0..gg.coords.len()).filter(|&i| gg.coords[i].norm() >= bb - 1e-9).collect();
        let c2 = conductance(&gg.graph, &inner, &outer);
        let exact2 = 4.0 * std::f64::consts::PI * a * bb / (bb - a);
        assert!((c2 - exact2).abs() < 0.25 * exact2, "{c2} vs {exact2}");
        let m3 = connecting_modulus(&gg.graph, &inner, &outer, 3.0, &ModulusSettings::with_tol(1e-3)).unwrap();
        let exact3 = ring_capacity_exact(a, bb).unwrap();
        assert!(m3.value > exact3 * 3f64.powf(-1.5) && m3.value < exact3, "{} vs {exact3}", m3.value);
    }
}
