//! Max-flow solvers for replica allocations.
//!
//! With single-node choices the min-max split is a transportation problem:
//! source to object `i` with capacity `ρ_i`, object to each hosting node
//! uncapped, node to sink with capacity `t`. The split with max load `t` exists
//! exactly when the max flow saturates every source edge.

use crate::allocation::Allocation;
use crate::error::{Error, Result};

struct Network {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    level: Vec<i32>,
    next: Vec<usize>,
}

impl Network {
    fn new(vertices: usize) -> Self {
        Self {
            adj: vec![Vec::new(); vertices],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; vertices],
            next: vec![0; vertices],
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: f64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0.0);
    }

    fn bfs(&mut self, s: usize, t: usize, eps: f64) -> bool {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > eps && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    // Blocking flow along the level graph, walked iteratively.
    fn blocking_flow(&mut self, s: usize, t: usize, eps: f64) -> f64 {
        self.next.fill(0);
        let mut total = 0.0;
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let push = path.iter().map(|&e| self.cap[e]).fold(f64::INFINITY, f64::min);
                for &e in &path {
                    self.cap[e] -= push;
                    self.cap[e ^ 1] += push;
                }
                total += push;
                path.clear();
                u = s;
                continue;
            }
            let mut advanced = false;
            while self.next[u] < self.adj[u].len() {
                let e = self.adj[u][self.next[u]];
                let v = self.to[e];
                if self.cap[e] > eps && self.level[v] == self.level[u] + 1 {
                    path.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                self.next[u] += 1;
            }
            if !advanced {
                self.level[u] = -1;
                match path.pop() {
                    Some(e) => {
                        u = self.to[e ^ 1];
                        self.next[u] += 1;
                    }
                    None => return total,
                }
            }
        }
    }

    fn max_flow(&mut self, s: usize, t: usize, eps: f64) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t, eps) {
            flow += self.blocking_flow(s, t, eps);
        }
        flow
    }

    fn reachable(&self, s: usize, eps: f64) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > eps && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Reusable exact min-max load solver for one replica allocation.
#[derive(Debug, Clone)]
pub struct ReplicaSolver {
    n: usize,
    hosts: Vec<Vec<usize>>,
    single_choice: bool,
}

const FEASIBLE_SLACK: f64 = 1e-12;

impl ReplicaSolver {
    pub fn new(alloc: &Allocation) -> Result<Self> {
        if !alloc.is_replica() {
            return Err(Error::unsupported(
                "flow solvers need single-node service choices (r = 1)",
            ));
        }
        let hosts: Vec<Vec<usize>> = (0..alloc.k())
            .map(|o| alloc.choice_union(o).into_iter().collect())
            .collect();
        let single_choice = hosts.iter().all(|h| h.len() == 1);
        Ok(Self {
            n: alloc.n(),
            hosts,
            single_choice,
        })
    }

    fn check(&self, rho: &[f64]) -> Result<f64> {
        if rho.len() != self.hosts.len() {
            return Err(Error::invalid(format!(
                "demand vector has length {}, allocation has {} objects",
                rho.len(),
                self.hosts.len()
            )));
        }
        if let Some(x) = rho.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::invalid(format!("demand entries must be finite and non-negative, got {x}")));
        }
        Ok(rho.iter().sum())
    }

    fn network(&self, demand: &[f64], t: f64) -> Network {
        let k = self.hosts.len();
        let sink = 1 + k + self.n;
        let mut net = Network::new(sink + 1);
        for (i, hs) in self.hosts.iter().enumerate() {
            if demand[i] > 0.0 {
                net.add_edge(0, 1 + i, demand[i]);
                for &v in hs {
                    net.add_edge(1 + i, 1 + k + v, f64::INFINITY);
                }
            }
        }
        for v in 0..self.n {
            net.add_edge(1 + k + v, sink, t);
        }
        net
    }

    // Max flow with node capacity `t` for a demand normalised to sum 1.
    fn flow_at(&self, demand: &[f64], t: f64) -> (f64, Network) {
        let mut net = self.network(demand, t);
        let sink = 1 + self.hosts.len() + self.n;
        let eps = FEASIBLE_SLACK * 1e-3;
        let f = net.max_flow(0, sink, eps);
        (f, net)
    }

    /// Optimal maximum node load `t*`.
    ///
    /// Parametric search: whenever capacity `t` is infeasible the minimum cut
    /// exposes an object set `A` with `ρ(A) > t |N(A)|`, and `t` jumps to that
    /// ratio. Ratios strictly increase and `t* = max_A ρ(A)/|N(A)|`, so the
    /// loop ends on the exact optimum after a few cuts.
    pub fn max_load(&self, rho: &[f64]) -> Result<f64> {
        let sigma = self.check(rho)?;
        if sigma == 0.0 {
            return Ok(0.0);
        }
        if self.single_choice {
            let mut loads = vec![0.0; self.n];
            for (hs, &x) in self.hosts.iter().zip(rho) {
                loads[hs[0]] += x;
            }
            return Ok(loads.into_iter().fold(0.0, f64::max));
        }
        let demand: Vec<f64> = rho.iter().map(|x| x / sigma).collect();
        let k = self.hosts.len();
        let mut touched = vec![false; self.n];
        let mut t: f64 = 0.0;
        for (hs, &x) in self.hosts.iter().zip(&demand) {
            if x > 0.0 {
                hs.iter().for_each(|&v| touched[v] = true);
                t = t.max(x / hs.len() as f64);
            }
        }
        t = t.max(1.0 / touched.iter().filter(|&&b| b).count() as f64);

        for _ in 0..4 * (k + 2) {
            let (f, net) = self.flow_at(&demand, t);
            if f >= 1.0 - FEASIBLE_SLACK {
                return Ok(t * sigma);
            }
            let side = net.reachable(0, FEASIBLE_SLACK * 1e-3);
            let mut mass = 0.0;
            let mut nodes = vec![false; self.n];
            for i in (0..k).filter(|&i| side[1 + i] && demand[i] > 0.0) {
                mass += demand[i];
                self.hosts[i].iter().for_each(|&v| nodes[v] = true);
            }
            let count = nodes.iter().filter(|&&b| b).count();
            if count == 0 {
                return Err(Error::NumericalFailure("flow cut exposed no overloaded set".into()));
            }
            let ratio = mass / count as f64;
            if ratio <= t * (1.0 + FEASIBLE_SLACK) {
                return Ok(t * sigma);
            }
            t = ratio;
        }
        Err(Error::NumericalFailure("parametric flow search did not settle".into()))
    }

    /// Bisection on `t` over `[max_i ρ_i/|C_i|, Σ]` with a max-flow feasibility test.
    pub fn max_load_bisection(&self, rho: &[f64], tol: f64) -> Result<f64> {
        let sigma = self.check(rho)?;
        if !(tol > 0.0) {
            return Err(Error::invalid("bisection tolerance must be positive"));
        }
        if sigma == 0.0 {
            return Ok(0.0);
        }
        let demand: Vec<f64> = rho.iter().map(|x| x / sigma).collect();
        let mut lo = self
            .hosts
            .iter()
            .zip(&demand)
            .map(|(hs, &x)| x / hs.len() as f64)
            .fold(0.0, f64::max);
        let mut hi = 1.0;
        let rel_tol = tol / sigma;
        while hi - lo > rel_tol {
            let mid = 0.5 * (lo + hi);
            let (f, _) = self.flow_at(&demand, mid);
            if f >= 1.0 - FEASIBLE_SLACK {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi) * sigma)
    }
}

/// `t*` by bisection with max-flow feasibility; an independent check on the LP.
pub fn min_max_load_flow(alloc: &Allocation, rho: &[f64], tol: f64) -> Result<f64> {
    ReplicaSolver::new(alloc)?.max_load_bisection(rho, tol)
}

/// Exact `t*` for a replica allocation through parametric max flow.
pub fn replica_max_load(alloc: &Allocation, rho: &[f64]) -> Result<f64> {
    ReplicaSolver::new(alloc)?.max_load(rho)
}
