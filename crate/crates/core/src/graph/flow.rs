use std::collections::VecDeque;

#[derive(Clone, Copy, Debug)]
struct Arc {
    to: usize,
    cap: f64,
}

/// Dinic's maximum flow on real capacities. Arcs are stored in pairs so that `i ^ 1` is
/// the reverse of `i`.
#[derive(Clone, Debug)]
pub struct MaxFlow {
    arcs: Vec<Arc>,
    head: Vec<Vec<usize>>,
    level: Vec<i64>,
    next: Vec<usize>,
    eps: f64,
}

impl MaxFlow {
    pub fn new(n: usize) -> Self {
        MaxFlow { arcs: Vec::new(), head: vec![Vec::new(); n], level: vec![0; n], next: vec![0; n], eps: 0.0 }
    }

    /// Adds `u → v` with capacity `cap` and `v → u` with capacity `rev_cap`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64, rev_cap: f64) {
        self.head[u].push(self.arcs.len());
        self.arcs.push(Arc { to: v, cap });
        self.head[v].push(self.arcs.len());
        self.arcs.push(Arc { to: u, cap: rev_cap });
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &a in &self.head[x] {
                let arc = self.arcs[a];
                if arc.cap > self.eps && self.level[arc.to] < 0 {
                    self.level[arc.to] = self.level[x] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, x: usize, t: usize, pushed: f64) -> f64 {
        if x == t {
            return pushed;
        }
        while self.next[x] < self.head[x].len() {
            let a = self.head[x][self.next[x]];
            let arc = self.arcs[a];
            if arc.cap > self.eps && self.level[arc.to] == self.level[x] + 1 {
                let got = self.dfs(arc.to, t, pushed.min(arc.cap));
                if got > 0.0 {
                    self.arcs[a].cap -= got;
                    self.arcs[a ^ 1].cap += got;
                    return got;
                }
            }
            self.next[x] += 1;
        }
        0.0
    }

    /// Pushes a maximum flow from `s` to `t` and returns its value. Residual capacities
    /// below `1e-14` of the largest capacity count as saturated.
    pub fn run(&mut self, s: usize, t: usize) -> f64 {
        let largest = self.arcs.iter().map(|a| a.cap).fold(0.0, f64::max);
        self.eps = 1e-14 * largest;
        let mut total = 0.0;
        while self.bfs(s, t) {
            self.next.fill(0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Vertices reachable from `s` through unsaturated arcs.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &a in &self.head[x] {
                let arc = self.arcs[a];
                if arc.cap > self.eps && !seen[arc.to] {
                    seen[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        seen
    }
}
