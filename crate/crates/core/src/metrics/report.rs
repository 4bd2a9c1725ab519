use std::io::Write;

use serde::{Deserialize, Serialize};

use super::simulate;
use crate::allocation::{Allocation, AllocationKind};
use crate::error::Result;

/// Column order of the per-configuration CSV table.
pub const CSV_COLUMNS: [&str; 17] = [
    "kind", "n", "k", "d", "r", "sigma", "trials", "p_sigma", "p_lo", "p_hi", "i_mean",
    "i_stderr", "i_q05", "i_q50", "i_q95", "seed", "version",
];

/// One simulated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub kind: AllocationKind,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub r: usize,
    pub sigma: f64,
    pub trials: u64,
    pub p_sigma: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub i_mean: f64,
    pub i_stderr: f64,
    pub i_q05: f64,
    pub i_q50: f64,
    pub i_q95: f64,
    pub seed: u64,
    pub version: String,
}

/// Simulates one allocation at one load and summarises it as a table row.
pub fn run_point(alloc: &Allocation, sigma: f64, trials: u64, seed: u64) -> Result<ExperimentRow> {
    let sim = simulate(alloc, sigma, trials, seed)?;
    let q = sim.imbalance.quantiles.expect("mean estimates carry quantiles");
    Ok(ExperimentRow {
        kind: alloc.kind(),
        n: alloc.n(),
        k: alloc.k(),
        d: alloc.d(),
        r: alloc.r(),
        sigma,
        trials,
        p_sigma: sim.p_sigma.mean,
        p_lo: sim.p_sigma.ci95_lo,
        p_hi: sim.p_sigma.ci95_hi,
        i_mean: sim.imbalance.mean,
        i_stderr: sim.imbalance.stderr,
        i_q05: q.q05,
        i_q50: q.q50,
        i_q95: q.q95,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

pub fn write_rows_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
