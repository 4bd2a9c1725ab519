//! Load-balancing analysis for redundant distributed-storage allocations.
//!
//! Object demands are modelled as uniform spacings of a fixed cumulative load.
//! Each allocation (single-choice, clustering, cyclic, block design, cyclic
//! XOR) is turned into routing matrices, the demand split that minimises the
//! maximum node load is solved exactly, and two metrics are estimated:
//!
//! * the probability of robustness `P_Σ`, the chance that a uniformly drawn
//!   demand vector of total `Σ` can be served with every node load at most 1;
//! * the load imbalance factor `I`, the optimal maximum node load divided by
//!   the perfectly balanced value `Σ/n`.
//!
//! The modules mirror the pipeline: [`spacings`] samples demand and evaluates
//! extreme-value predictors, [`allocation`] builds and validates designs,
//! [`loadsolver`] solves the min-max split and the closed-form stability
//! conditions, and [`metrics`] runs the Monte Carlo and exact estimators.

pub mod allocation;
pub mod error;
pub mod loadsolver;
pub mod metrics;
pub mod spacings;
pub mod stats;

pub use allocation::{Allocation, AllocationKind, AllocationMatrices};
pub use error::{Error, Result};
pub use loadsolver::{LoadSplit, StabilityVerdict};
pub use metrics::MetricEstimate;
pub use spacings::{RandomStream, SpacingSample};
