//! Closed-form asymptotic predictors for maximal spacings and the metrics
//! derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant, the mean of the standard Gumbel law.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Growth regime of the number of choices relative to `log n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FixedMSingleChoice,
    SmallD,
    LogOrderD,
}

/// A predicted band for the load imbalance factor `I`, plus the cumulative
/// load thresholds (in units of `n / log n`) of the `P_Σ` transition.
///
/// `I · scale` is expected near `centering`; `[band_lo, band_hi]` is the
/// limiting range of `I` itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub centering: f64,
    pub scale: f64,
    pub regime: Regime,
    pub alpha: Option<f64>,
    pub tau: Option<f64>,
    pub band_lo: f64,
    pub band_hi: f64,
    /// `P_Σ → 1` when `Σ = b · n / log n` with `b` below this value.
    pub b_stable_below: f64,
    /// `P_Σ → 0` when `b` exceeds this value.
    pub b_unstable_above: f64,
}

impl AsymptoticPrediction {
    /// Limiting value of `P_Σ` at `Σ = b · n / log n`, if the prediction decides it.
    pub fn predict_p_sigma(&self, b: f64) -> Option<f64> {
        if b < self.b_stable_below {
            Some(1.0)
        } else if b > self.b_unstable_above {
            Some(0.0)
        } else {
            None
        }
    }
}

/// Standard Gumbel distribution function `exp(-exp(-x))`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// `log log n`; defined as a positive quantity only for `n >= 3`.
pub fn iterated_log(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!("log log n needs n >= 3, got {n}")));
    }
    Ok((n as f64).ln().ln())
}

/// Unique positive root of `exp(-1/c) = (1 + α) exp(-α)`.
///
/// Solved in log form, `ln(1 + α) - α + 1/c = 0`, whose left side is strictly
/// decreasing for `α > 0`; bisection followed by a Newton polish.
pub fn solve_alpha(c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("c must be positive, got {c}")));
    }
    let h = |a: f64| a.ln_1p() - a + 1.0 / c;
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while h(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let mut a = 0.5 * (lo + hi);
    for _ in 0..3 {
        let slope = -a / (1.0 + a);
        let step = h(a) / slope;
        let next = a - step;
        if next > 0.0 && next.is_finite() {
            a = next;
        }
    }
    Ok(a)
}

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|i| (i as f64).ln()).sum()
}

/// Single-choice storage with `m` objects per node.
pub fn predict_single_choice(n: usize, m: usize) -> Result<AsymptoticPrediction> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let loglog = iterated_log(n)?;
    let f_n = (m - 1) as f64 * loglog - ln_factorial(m - 1);
    let centering = (n as f64).ln() + f_n;
    let imbalance = centering / m as f64;
    Ok(AsymptoticPrediction {
        centering,
        scale: 1.0,
        regime: Regime::FixedMSingleChoice,
        alpha: None,
        tau: None,
        band_lo: imbalance,
        band_hi: imbalance,
        b_stable_below: m as f64,
        b_unstable_above: m as f64,
    })
}

/// Clustering or cyclic replica designs with `d` choices.
pub fn predict_d_choice(
    n: usize,
    d: usize,
    regime: Regime,
    c: Option<f64>,
) -> Result<AsymptoticPrediction> {
    if d == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    let loglog = iterated_log(n)?;
    let log_n = (n as f64).ln();
    let df = d as f64;
    match regime {
        Regime::SmallD => {
            let b = log_n + (df - 1.0) * (1.0 + loglog - df.ln());
            small_d_guard(b, n, d)?;
            Ok(AsymptoticPrediction {
                centering: b,
                scale: df,
                regime,
                alpha: None,
                tau: None,
                band_lo: b / (2.0 * df),
                band_hi: b / df,
                b_stable_below: df,
                b_unstable_above: 2.0 * df,
            })
        }
        Regime::LogOrderD => {
            let c = c.ok_or_else(|| Error::invalid("the log-order regime needs c"))?;
            let alpha = solve_alpha(c)?;
            let tau = c * (1.0 + alpha).powi(2) / alpha;
            let upper = 3.0 * (alpha + 1.0) / (2.0 * c * alpha) * loglog / log_n;
            Ok(AsymptoticPrediction {
                centering: upper,
                scale: 1.0,
                regime,
                alpha: Some(alpha),
                tau: Some(tau),
                band_lo: upper / 6.0,
                band_hi: upper,
                b_stable_below: df / (1.5 * tau),
                b_unstable_above: df / (0.25 * tau),
            })
        }
        Regime::FixedMSingleChoice => Err(Error::invalid(
            "use predict_single_choice for the single-choice regime",
        )),
    }
}

fn small_d_guard(centering: f64, n: usize, d: usize) -> Result<()> {
    if centering > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "n={n} is too small for the small-d expansion at d={d} (centering {centering:.3})"
        )))
    }
}

/// `d` choices built from one exact copy plus `d - 1` recovery sets of `r` nodes.
pub fn predict_xor(
    n: usize,
    d: usize,
    r: usize,
    regime: Regime,
    c: Option<f64>,
) -> Result<AsymptoticPrediction> {
    if r < 2 {
        return Err(Error::invalid(format!("XOR order r must be >= 2, got {r}")));
    }
    if d == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    let loglog = iterated_log(n)?;
    let log_n = (n as f64).ln();
    let df = d as f64;
    let rf = r as f64;
    match regime {
        Regime::SmallD => {
            let spread = rf * (df - 1.0);
            let beta = spread * (1.0 + loglog - (1.0 + spread).ln());
            let b = log_n + beta;
            small_d_guard(b, n, d)?;
            Ok(AsymptoticPrediction {
                centering: b,
                scale: df,
                regime,
                alpha: None,
                tau: None,
                band_lo: b / (2.0 * df),
                band_hi: b / df,
                b_stable_below: df,
                b_unstable_above: 2.0 * df,
            })
        }
        Regime::LogOrderD => {
            let c = c.ok_or_else(|| Error::invalid("the log-order regime needs c"))?;
            let alpha = solve_alpha(c)?;
            let tau = c * (1.0 + alpha).powi(2) / alpha;
            let upper = (alpha + 1.0) * (3.0 / (2.0 * c * alpha) * loglog / log_n + rf);
            Ok(AsymptoticPrediction {
                centering: upper,
                scale: 1.0,
                regime,
                alpha: Some(alpha),
                tau: Some(tau),
                band_lo: upper / 2.0,
                band_hi: upper,
                b_stable_below: df / (1.5 * tau),
                b_unstable_above: df / (0.25 * tau),
            })
        }
        Regime::FixedMSingleChoice => Err(Error::invalid(
            "the single-choice regime has no XOR variant",
        )),
    }
}

/// `β_{n,d}` correction of the XOR small-d band, exposed for reports.
pub fn xor_beta(n: usize, d: usize, r: usize) -> Result<f64> {
    let loglog = iterated_log(n)?;
    let spread = (r * (d - 1)) as f64;
    Ok(spread * (1.0 + loglog - (1.0 + spread).ln()))
}
