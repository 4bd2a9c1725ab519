//! Dense tableau simplex for `min t  s.t.  M x <= t 1,  T x = ρ,  x >= 0`.
//!
//! The starting basis is feasible by construction: every object sends its
//! whole demand to its first choice, `t` is the resulting largest node load
//! and the other nodes' slacks absorb the gap. No phase one is needed.

use std::io::Write;

use super::LoadSplit;
use crate::allocation::AllocationMatrices;
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_RUN: usize = 64;

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    // Row `rows` is the objective row.
    fn cost(&self, c: usize) -> f64 {
        self.at(self.rows, c)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.data[pr * w + pc];
        for c in 0..w {
            self.data[pr * w + c] *= inv;
        }
        self.data[pr * w + pc] = 1.0;
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[pc];
            if f != 0.0 {
                for (x, &p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }
}

fn check_demand(matrices: &AllocationMatrices, rho: &[f64]) -> Result<f64> {
    if rho.len() != matrices.k {
        return Err(Error::invalid(format!(
            "demand vector has length {}, allocation has {} objects",
            rho.len(),
            matrices.k
        )));
    }
    if let Some(x) = rho.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::invalid(format!("demand entries must be finite and non-negative, got {x}")));
    }
    Ok(rho.iter().sum())
}

/// Solves the min-max split exactly (up to floating tolerance).
pub fn min_max_load(matrices: &AllocationMatrices, rho: &[f64]) -> Result<LoadSplit> {
    let sigma = check_demand(matrices, rho)?;
    let (n, k, l) = (matrices.n, matrices.k, matrices.columns());
    if sigma == 0.0 {
        return Ok(LoadSplit {
            portions: vec![0.0; l],
            max_load: 0.0,
            node_loads: vec![0.0; n],
        });
    }
    let demand: Vec<f64> = rho.iter().map(|x| x / sigma).collect();

    let mut first_col = vec![usize::MAX; k];
    for (j, &(o, _)) in matrices.column_owner.iter().enumerate().rev() {
        first_col[o] = j;
    }
    if let Some(o) = first_col.iter().position(|&j| j == usize::MAX) {
        return Err(Error::invalid(format!("object {o} has no service choice")));
    }

    let t_col = l;
    let slack = |v: usize| l + 1 + v;
    let width = l + 1 + n + 1;
    let rows = n + k;
    let mut tab = Tableau {
        rows,
        width,
        data: vec![0.0; (rows + 1) * width],
        basis: vec![0; rows],
    };
    for (j, nodes) in matrices.column_nodes.iter().enumerate() {
        for &v in nodes {
            tab.data[v * width + j] += 1.0;
        }
        let o = matrices.column_owner[j].0;
        tab.data[(n + o) * width + j] = 1.0;
    }
    for v in 0..n {
        tab.data[v * width + t_col] = -1.0;
        tab.data[v * width + slack(v)] = 1.0;
    }
    for (i, &d) in demand.iter().enumerate() {
        tab.data[(n + i) * width + width - 1] = d;
    }
    tab.data[rows * width + t_col] = 1.0;

    for (i, &j) in first_col.iter().enumerate() {
        tab.pivot(n + i, j);
    }
    // Node rows now read s_v - t = -load_v; the busiest node hands its row to t.
    let busiest = (0..n)
        .min_by(|&a, &b| tab.rhs(a).total_cmp(&tab.rhs(b)))
        .expect("at least one node");
    tab.pivot(busiest, t_col);
    for v in (0..n).filter(|&v| v != busiest) {
        tab.basis[v] = slack(v);
    }

    run_simplex(&mut tab)?;

    let mut values = vec![0.0; width - 1];
    for r in 0..rows {
        values[tab.basis[r]] = tab.rhs(r);
    }
    if let Some(refined) = resolve_basis(matrices, &tab.basis, &demand) {
        for (r, &c) in tab.basis.iter().enumerate() {
            values[c] = refined[r];
        }
    }

    let mut portions = Vec::with_capacity(l);
    for &x in &values[..l] {
        if x < -1e-7 {
            return Err(Error::NumericalFailure(format!(
                "simplex returned a negative portion {x}"
            )));
        }
        portions.push(x.max(0.0) * sigma);
    }
    let mut node_loads = vec![0.0; n];
    let mut served = vec![0.0; k];
    for (j, &x) in portions.iter().enumerate() {
        for &v in &matrices.column_nodes[j] {
            node_loads[v] += x;
        }
        served[matrices.column_owner[j].0] += x;
    }
    let residual = served
        .iter()
        .zip(rho)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > 1e-9 * sigma {
        return Err(Error::NumericalFailure(format!(
            "demand constraint residual {residual:e} exceeds tolerance"
        )));
    }
    let max_load = node_loads.iter().copied().fold(0.0, f64::max);
    Ok(LoadSplit {
        portions,
        max_load,
        node_loads,
    })
}

fn run_simplex(tab: &mut Tableau) -> Result<()> {
    let cols = tab.width - 1;
    let max_iter = 50 * (tab.rows + cols) + 1000;
    let mut degenerate = 0usize;
    for _ in 0..max_iter {
        let bland = degenerate >= DEGENERATE_RUN;
        let entering = if bland {
            (0..cols).find(|&c| tab.cost(c) < -COST_TOL)
        } else {
            (0..cols)
                .filter(|&c| tab.cost(c) < -COST_TOL)
                .min_by(|&a, &b| tab.cost(a).total_cmp(&tab.cost(b)))
        };
        let Some(pc) = entering else {
            return Ok(());
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..tab.rows {
            let a = tab.at(r, pc);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = tab.rhs(r).max(0.0) / a;
            leave = match leave {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    if ratio < bratio - 1e-13
                        || (ratio <= bratio + 1e-13 && tab.basis[r] < tab.basis[br])
                    {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        let Some((pr, ratio)) = leave else {
            return Err(Error::NumericalFailure("simplex found an unbounded direction".into()));
        };
        if ratio <= 1e-13 {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        tab.pivot(pr, pc);
    }
    Err(Error::NumericalFailure(format!(
        "simplex did not converge within {max_iter} pivots"
    )))
}

// Recomputes the basic solution from the original columns to shed the
// rounding accumulated by repeated pivoting.
fn resolve_basis(matrices: &AllocationMatrices, basis: &[usize], demand: &[f64]) -> Option<Vec<f64>> {
    let (n, l) = (matrices.n, matrices.columns());
    let m = basis.len();
    let mut a = vec![0.0; m * (m + 1)];
    let w = m + 1;
    for (c, &col) in basis.iter().enumerate() {
        if col < l {
            for &v in &matrices.column_nodes[col] {
                a[v * w + c] += 1.0;
            }
            a[(n + matrices.column_owner[col].0) * w + c] = 1.0;
        } else if col == l {
            for v in 0..n {
                a[v * w + c] = -1.0;
            }
        } else {
            a[(col - l - 1) * w + c] = 1.0;
        }
    }
    for (i, &d) in demand.iter().enumerate() {
        a[(n + i) * w + m] = d;
    }
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| a[x * w + c].abs().total_cmp(&a[y * w + c].abs()))?;
        if a[p * w + c].abs() < 1e-12 {
            return None;
        }
        if p != c {
            for j in 0..w {
                a.swap(p * w + j, c * w + j);
            }
        }
        let inv = 1.0 / a[c * w + c];
        for r in 0..m {
            if r == c {
                continue;
            }
            let f = a[r * w + c] * inv;
            if f != 0.0 {
                for j in c..w {
                    a[r * w + j] -= f * a[c * w + j];
                }
            }
        }
    }
    Some((0..m).map(|r| a[r * w + m] / a[r * w + r]).collect())
}

/// Writes the min-max split instance in CPLEX LP format.
pub fn write_lp<W: Write>(matrices: &AllocationMatrices, rho: &[f64], mut out: W) -> Result<()> {
    check_demand(matrices, rho)?;
    let var = |j: usize| {
        let (o, c) = matrices.column_owner[j];
        format!("x_{o}_{c}")
    };
    writeln!(out, "\\ min-max node load split")?;
    writeln!(out, "Minimize")?;
    writeln!(out, " load: t")?;
    writeln!(out, "Subject To")?;
    let mut node_terms: Vec<Vec<String>> = vec![Vec::new(); matrices.n];
    for (j, nodes) in matrices.column_nodes.iter().enumerate() {
        for &v in nodes {
            node_terms[v].push(var(j));
        }
    }
    for (v, terms) in node_terms.iter().enumerate() {
        if terms.is_empty() {
            writeln!(out, " node_{v}: - t <= 0")?;
        } else {
            writeln!(out, " node_{v}: {} - t <= 0", terms.join(" + "))?;
        }
    }
    for (i, d) in rho.iter().enumerate() {
        let terms: Vec<String> = (0..matrices.columns())
            .filter(|&j| matrices.column_owner[j].0 == i)
            .map(var)
            .collect();
        writeln!(out, " demand_{i}: {} = {d:?}", terms.join(" + "))?;
    }
    writeln!(out, "End")?;
    Ok(())
}
