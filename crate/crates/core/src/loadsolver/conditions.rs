//! Closed-form stability conditions on the circular window sums of demand.
//!
//! A demand sample's spacings are already scaled by `Σ`, so the statistic is
//! the largest sum of `w` circularly consecutive object demands.

use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, AllocationKind};
use crate::error::{Error, Result};
use crate::spacings::{circle_maxima_all, max_d_spacing_circle, SpacingSample};

/// Which form of the necessary condition to evaluate for cyclic layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NecessaryVariant {
    /// Window of `d + 1` objects must carry at most `2d`.
    WindowDPlusOne,
    /// Window of `d` objects must carry at most `2d - 1` (cyclic only).
    WindowD,
}

fn check_sample(alloc: &Allocation, sample: &SpacingSample) -> Result<()> {
    if sample.k() != alloc.k() {
        return Err(Error::invalid(format!(
            "sample has {} demands, allocation has {} objects",
            sample.k(),
            alloc.k()
        )));
    }
    Ok(())
}

// Largest circular window sum of width `w`, clamped to `[1, k]`.
fn window(sample: &SpacingSample, w: usize) -> f64 {
    max_d_spacing_circle(sample, w.clamp(1, sample.k())).expect("width clamped into range")
}

fn single_choice_stable(alloc: &Allocation, sample: &SpacingSample) -> bool {
    let mut loads = vec![0.0; alloc.n()];
    for (sets, &x) in alloc.recovery_sets().iter().zip(sample.spacings()) {
        loads[sets[0][0]] += x;
    }
    loads.into_iter().all(|l| l <= 1.0 + super::STABILITY_TOL)
}

/// `true` guarantees the demand can be served with every node load at most 1.
pub fn sufficient_condition(alloc: &Allocation, sample: &SpacingSample) -> Result<bool> {
    check_sample(alloc, sample)?;
    let d = alloc.d() as f64;
    Ok(match alloc.kind() {
        AllocationKind::SingleChoice => single_choice_stable(alloc, sample),
        AllocationKind::Clustering | AllocationKind::Cyclic => window(sample, alloc.d()) <= d,
        AllocationKind::BlockDesign => window(sample, alloc.d()) <= d / 2.0,
        AllocationKind::CyclicXor => window(sample, xor_span(alloc)) <= d,
        AllocationKind::Custom => return Err(no_condition(alloc)),
    })
}

/// `false` proves some node load must exceed 1.
pub fn necessary_condition(alloc: &Allocation, sample: &SpacingSample) -> Result<bool> {
    necessary_condition_variant(alloc, sample, NecessaryVariant::WindowDPlusOne)
}

/// Necessary condition with an explicit window choice for cyclic layouts.
///
/// Clustering only admits [`NecessaryVariant::WindowDPlusOne`]; other kinds
/// ignore the variant.
pub fn necessary_condition_variant(
    alloc: &Allocation,
    sample: &SpacingSample,
    variant: NecessaryVariant,
) -> Result<bool> {
    check_sample(alloc, sample)?;
    let d = alloc.d() as f64;
    Ok(match (alloc.kind(), variant) {
        (AllocationKind::SingleChoice, _) => single_choice_stable(alloc, sample),
        (AllocationKind::Cyclic, NecessaryVariant::WindowD) => {
            window(sample, alloc.d()) <= 2.0 * d - 1.0
        }
        (AllocationKind::Clustering, NecessaryVariant::WindowD) => {
            return Err(Error::unsupported(
                "the width-d necessary window is only established for cyclic layouts",
            ))
        }
        (AllocationKind::Clustering | AllocationKind::Cyclic, _) => {
            window(sample, alloc.d() + 1) <= 2.0 * d
        }
        (AllocationKind::BlockDesign, _) => window(sample, alloc.d()) <= d * d - 2.0 * d + 3.0,
        (AllocationKind::CyclicXor, _) => window(sample, xor_span(alloc)) <= 2.0 * d,
        (AllocationKind::Custom, _) => return Err(no_condition(alloc)),
    })
}

fn xor_span(alloc: &Allocation) -> usize {
    1 + alloc.r() * (alloc.d() - 1)
}

fn no_condition(alloc: &Allocation) -> Error {
    Error::unsupported(format!(
        "no closed-form stability condition for `{}` allocations; use the r-gap forms",
        alloc.kind()
    ))
}

/// Sufficient condition for an r-gap design: every `r + 1` consecutive objects carry at most `d`.
pub fn r_gap_sufficient(sample: &SpacingSample, radius: usize, d: usize) -> bool {
    window(sample, radius + 1) <= d as f64
}

/// Necessary condition for an r-gap design: every run of `i` consecutive
/// objects carries at most `i + 2r`, for `i = 1, ..., k - 2r`.
pub fn r_gap_necessary(sample: &SpacingSample, radius: usize) -> bool {
    let maxima = circle_maxima_all(sample);
    let k = sample.k();
    (1..=k.saturating_sub(2 * radius))
        .all(|i| maxima[i - 1] <= (i + 2 * radius) as f64)
}
