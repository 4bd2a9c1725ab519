//! Monte Carlo and exact estimators of `P_Σ` and the imbalance factor `I`.
//!
//! Trial `i` always draws its demand from stream `(master_seed, i)`, so two
//! allocations with the same object count see identical demand vectors under
//! the same seed. Trials run in parallel but are reduced in index order.

mod bands;
mod exact;
mod limits;
mod report;

pub use bands::{
    asymptotic_band_check, b_thresholds, BandCheck, BandReport, BandSlack, SigmaRule,
};
pub use exact::{exact_p_sigma_k3, ExactK3, ExactRegionK3};
pub use limits::{
    circle_line_checks, gumbel_ks_check, n_alpha_beta_checks, run_limit_checks, LimitCheck,
    LimitCheckConfig,
};
pub use report::{run_point, write_rows_csv, ExperimentRow, CSV_COLUMNS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::loadsolver::{is_stable, MaxLoadSolver};
use crate::spacings::{sample_uniform_spacings, RandomStream};
use crate::stats::{mean_stderr, quantile_sorted, sorted_copy, wilson_interval, Z95};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Self {
        let sorted = sorted_copy(values);
        Self {
            q05: quantile_sorted(&sorted, 0.05),
            q50: quantile_sorted(&sorted, 0.5),
            q95: quantile_sorted(&sorted, 0.95),
        }
    }
}

/// A Monte Carlo estimate with its 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub trials: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantiles: Option<Quantiles>,
}

impl MetricEstimate {
    /// Proportion estimate with a Wilson interval.
    pub fn proportion(successes: u64, trials: u64, seed: u64) -> Self {
        let p = successes as f64 / trials as f64;
        let (lo, hi) = wilson_interval(successes, trials, Z95);
        Self {
            mean: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            ci95_lo: lo,
            ci95_hi: hi,
            trials,
            seed,
            quantiles: None,
        }
    }

    /// Mean estimate with a normal interval and empirical quantiles.
    pub fn sample_mean(values: &[f64], seed: u64) -> Self {
        let (mean, stderr) = mean_stderr(values);
        Self {
            mean,
            stderr,
            ci95_lo: mean - Z95 * stderr,
            ci95_hi: mean + Z95 * stderr,
            trials: values.len() as u64,
            seed,
            quantiles: Some(Quantiles::of(values)),
        }
    }
}

/// Outcome of one Monte Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Optimal maximum node load `t*`.
    pub max_load: f64,
    /// Realised total demand; equals `Σ` up to rounding.
    pub total: f64,
}

impl TrialOutcome {
    pub fn imbalance(&self, n: usize) -> f64 {
        self.max_load * n as f64 / self.total
    }
}

/// Solves every trial, returning outcomes in trial order.
pub fn simulate_trials(
    alloc: &Allocation,
    sigma: f64,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<TrialOutcome>> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let solver = MaxLoadSolver::for_allocation(alloc);
    let k = alloc.k();
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let sample = sample_uniform_spacings(k, sigma, RandomStream::new(master_seed, i))?;
            let rho = sample.spacings();
            let max_load = solver.max_load(rho).map_err(|e| Error::Trial {
                index: i,
                source: Box::new(e),
            })?;
            Ok(TrialOutcome {
                max_load,
                total: rho.iter().sum(),
            })
        })
        .collect()
}

/// Both metrics from one batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub p_sigma: MetricEstimate,
    pub imbalance: MetricEstimate,
}

impl Simulation {
    pub fn from_trials(outcomes: &[TrialOutcome], n: usize, seed: u64) -> Self {
        let stable = outcomes.iter().filter(|o| is_stable(o.max_load)).count() as u64;
        let factors: Vec<f64> = outcomes.iter().map(|o| o.imbalance(n)).collect();
        Self {
            p_sigma: MetricEstimate::proportion(stable, outcomes.len() as u64, seed),
            imbalance: MetricEstimate::sample_mean(&factors, seed),
        }
    }
}

pub fn simulate(alloc: &Allocation, sigma: f64, trials: u64, master_seed: u64) -> Result<Simulation> {
    let outcomes = simulate_trials(alloc, sigma, trials, master_seed)?;
    Ok(Simulation::from_trials(&outcomes, alloc.n(), master_seed))
}

/// Fraction of demand draws of total `sigma` that every node can serve.
pub fn estimate_p_sigma(
    alloc: &Allocation,
    sigma: f64,
    trials: u64,
    master_seed: u64,
) -> Result<MetricEstimate> {
    Ok(simulate(alloc, sigma, trials, master_seed)?.p_sigma)
}

/// Mean imbalance factor `t* n / Σ`, with quantiles.
pub fn estimate_imbalance(
    alloc: &Allocation,
    sigma: f64,
    trials: u64,
    master_seed: u64,
) -> Result<MetricEstimate> {
    Ok(simulate(alloc, sigma, trials, master_seed)?.imbalance)
}

/// Per-trial imbalance factors, for paired comparisons across allocations.
pub fn imbalance_samples(
    alloc: &Allocation,
    sigma: f64,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<f64>> {
    Ok(simulate_trials(alloc, sigma, trials, master_seed)?
        .iter()
        .map(|o| o.imbalance(alloc.n()))
        .collect())
}

/// Mean and standard error of the paired difference `a - b`.
pub fn paired_difference(a: &[f64], b: &[f64]) -> (f64, f64) {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mean_stderr(&diff)
}
