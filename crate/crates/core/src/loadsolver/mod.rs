//! Optimal demand splitting and stability verdicts.

mod conditions;
mod flow;
mod simplex;

pub use conditions::{
    necessary_condition, necessary_condition_variant, r_gap_necessary, r_gap_sufficient,
    sufficient_condition, NecessaryVariant,
};
pub use flow::{min_max_load_flow, replica_max_load, ReplicaSolver};
pub use simplex::{min_max_load, write_lp};

use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, AllocationMatrices};
use crate::error::{Error, Result};

/// A node is stable when its load is at most `1 + STABILITY_TOL`.
pub const STABILITY_TOL: f64 = 1e-9;

pub fn is_stable(max_load: f64) -> bool {
    max_load <= 1.0 + STABILITY_TOL
}

/// An optimal split of object demand over service choices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadSplit {
    /// Demand routed to each column of `M`, in column order.
    pub portions: Vec<f64>,
    pub max_load: f64,
    pub node_loads: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    LpExact,
    Sufficient,
    Necessary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub max_load: f64,
    pub condition_kind: ConditionKind,
}

impl StabilityVerdict {
    pub fn exact(max_load: f64) -> Self {
        Self {
            stable: is_stable(max_load),
            max_load,
            condition_kind: ConditionKind::LpExact,
        }
    }
}

/// Picks the exact solver for an allocation: parametric max flow for
/// replicas, the simplex otherwise.
#[derive(Debug, Clone)]
pub enum MaxLoadSolver {
    Flow(ReplicaSolver),
    Lp(AllocationMatrices),
}

impl MaxLoadSolver {
    pub fn for_allocation(alloc: &Allocation) -> Self {
        match ReplicaSolver::new(alloc) {
            Ok(s) => MaxLoadSolver::Flow(s),
            Err(_) => MaxLoadSolver::Lp(alloc.to_matrices()),
        }
    }

    /// Optimal maximum node load `t*`.
    pub fn max_load(&self, rho: &[f64]) -> Result<f64> {
        match self {
            MaxLoadSolver::Flow(s) => s.max_load(rho),
            MaxLoadSolver::Lp(m) => Ok(min_max_load(m, rho)?.max_load),
        }
    }
}

/// `I = t* n / Σ`, the optimal maximum load relative to perfect balance.
pub fn imbalance_factor(matrices: &AllocationMatrices, rho: &[f64], n: usize) -> Result<f64> {
    let sigma: f64 = rho.iter().sum();
    if !(sigma > 0.0) {
        return Err(Error::invalid("imbalance factor needs a positive total demand"));
    }
    let split = min_max_load(matrices, rho)?;
    Ok(split.max_load * n as f64 / sigma)
}
