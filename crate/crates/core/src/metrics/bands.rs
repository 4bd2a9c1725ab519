//! Finite-n comparison of simulated metrics against the asymptotic bands.

use serde::{Deserialize, Serialize};

use super::{simulate, simulate_trials, Simulation};
use crate::allocation::{build_allocation, AllocationKind};
use crate::error::{Error, Result};
use crate::spacings::{predict_d_choice, predict_single_choice, predict_xor, Regime, EULER_GAMMA};

/// How the cumulative load `Σ` is derived from `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SigmaRule {
    Absolute { value: f64 },
    FractionOfN { fraction: f64 },
    BNOverLogN { b: f64 },
}

impl SigmaRule {
    pub fn resolve(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        let sigma = match *self {
            SigmaRule::Absolute { value } => value,
            SigmaRule::FractionOfN { fraction } => fraction * nf,
            SigmaRule::BNOverLogN { b } => {
                if n < 2 {
                    return Err(Error::invalid("b n / log n needs n >= 2"));
                }
                b * nf / nf.ln()
            }
        };
        if sigma > 0.0 && sigma.is_finite() {
            Ok(sigma)
        } else {
            Err(Error::invalid(format!("sigma must resolve to a positive value, got {sigma}")))
        }
    }
}

/// Calibration of the finite-n bands.
///
/// The imbalance band is the limiting band for `I · d / B` scaled by
/// `i_lo_factor` and `i_hi_factor`; `P_Σ` is probed at `probe_low` times the
/// stable threshold and `probe_high` times the unstable one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSlack {
    pub i_lo_factor: f64,
    pub i_hi_factor: f64,
    pub single_lo: f64,
    pub single_hi: f64,
    pub probe_low: f64,
    pub probe_high: f64,
    pub p_high: f64,
    pub p_low: f64,
}

impl Default for BandSlack {
    fn default() -> Self {
        Self {
            i_lo_factor: 0.8,
            i_hi_factor: 1.2,
            single_lo: 0.8,
            single_hi: 1.3,
            probe_low: 0.5,
            probe_high: 1.5,
            p_high: 0.9,
            p_low: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub name: String,
    pub observed: f64,
    pub stderr: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

impl BandCheck {
    fn new(name: impl Into<String>, observed: f64, stderr: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            stderr,
            lo,
            hi,
            pass: lo <= observed && observed <= hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub kind: AllocationKind,
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub trials: u64,
    pub seed: u64,
    pub sigma: f64,
    /// Normaliser of the imbalance check: `B` (or `log n + γ` for single choice).
    pub centering: f64,
    pub simulation: Simulation,
    pub checks: Vec<BandCheck>,
}

impl BandReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Values of `b` (with `Σ = b n / log n`) below which the sufficient
/// condition predicts `P_Σ → 1`, and above which the necessary one predicts
/// `P_Σ → 0`.
pub fn b_thresholds(kind: AllocationKind, d: usize, r: usize) -> Result<(f64, f64)> {
    let df = d as f64;
    Ok(match kind {
        AllocationKind::SingleChoice => (df, df),
        AllocationKind::Clustering | AllocationKind::Cyclic => (df, 2.0 * df),
        AllocationKind::BlockDesign => (df / 2.0, df * df - 2.0 * df + 3.0),
        AllocationKind::CyclicXor => {
            if r < 2 {
                return Err(Error::invalid("cyclic_xor needs r >= 2"));
            }
            (df, 2.0 * df)
        }
        AllocationKind::Custom => {
            return Err(Error::unsupported("custom allocations have no predicted thresholds"))
        }
    })
}

// Limiting band of `I · d / B` implied by the stability conditions.
fn limit_band(kind: AllocationKind, d: usize) -> (f64, f64) {
    let df = d as f64;
    match kind {
        AllocationKind::BlockDesign => (df / (df * df - 2.0 * df + 3.0), 2.0),
        _ => (0.5, 1.0),
    }
}

/// Simulates `I` and `P_Σ` for a design and checks them against the bands.
///
/// For single choice `d` is read as `m`, the objects per node.
#[allow(clippy::too_many_arguments)]
pub fn asymptotic_band_check(
    kind: AllocationKind,
    n: usize,
    d: usize,
    r: usize,
    sigma_rule: SigmaRule,
    trials: u64,
    seed: u64,
    slack: BandSlack,
) -> Result<BandReport> {
    let k = if kind == AllocationKind::SingleChoice { n * d } else { n };
    let alloc = build_allocation(kind, n, k, d, r)?;
    let n = alloc.n();
    let sigma = sigma_rule.resolve(n)?;
    let simulation = simulate(&alloc, sigma, trials, seed)?;
    let i = &simulation.imbalance;
    let df = d as f64;

    let mut checks = Vec::new();
    let centering = match kind {
        AllocationKind::SingleChoice => {
            let p = predict_single_choice(n, d)?;
            let target = (p.centering + EULER_GAMMA) / df;
            checks.push(BandCheck::new(
                "imbalance / ((log n + f_n + gamma) / m)",
                i.mean / target,
                i.stderr / target,
                slack.single_lo,
                slack.single_hi,
            ));
            p.centering + EULER_GAMMA
        }
        _ => {
            let p = if kind == AllocationKind::CyclicXor {
                predict_xor(n, d, r, Regime::SmallD, None)?
            } else {
                predict_d_choice(n, d, Regime::SmallD, None)?
            };
            let (lo, hi) = limit_band(kind, d);
            checks.push(BandCheck::new(
                "imbalance * d / B",
                i.mean * df / p.centering,
                i.stderr * df / p.centering,
                lo * slack.i_lo_factor,
                hi * slack.i_hi_factor,
            ));
            p.centering
        }
    };

    let (b_lo, b_hi) = b_thresholds(kind, d, r)?;
    let probes = [
        ("p_sigma below stable threshold", slack.probe_low * b_lo, slack.p_high, 1.0),
        ("p_sigma above unstable threshold", slack.probe_high * b_hi, 0.0, slack.p_low),
    ];
    for (name, b, lo, hi) in probes {
        let s = SigmaRule::BNOverLogN { b }.resolve(n)?;
        let outcomes = simulate_trials(&alloc, s, trials, seed)?;
        let p = Simulation::from_trials(&outcomes, n, seed).p_sigma;
        checks.push(BandCheck::new(format!("{name} (b = {b:.3})"), p.mean, p.stderr, lo, hi));
    }

    Ok(BandReport {
        kind,
        n,
        d,
        r,
        trials,
        seed,
        sigma,
        centering,
        simulation,
        checks,
    })
}
