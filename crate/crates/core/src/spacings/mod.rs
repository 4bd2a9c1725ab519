//! Uniform-spacing demand model and windowed maxima.
//!
//! A demand vector of total `Σ` drawn uniformly from the simplex has the law
//! of `k` uniform spacings of `[0, Σ]`. We draw it as `k` unit exponentials
//! normalised by their sum, which is exact in distribution and O(k).

mod predict;

pub use predict::{
    gumbel_cdf, iterated_log, predict_d_choice, predict_single_choice, predict_xor, solve_alpha, xor_beta,
    AsymptoticPrediction, Regime, EULER_GAMMA,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_REL_TOL: f64 = 1e-12;

/// Identifies one reproducible random substream.
///
/// Streams are ChaCha8 keyed by `master_seed` with the ChaCha stream id set to
/// `stream_index`, so distinct indices never share keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// `k` non-negative spacings summing to `sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingSample {
    spacings: Vec<f64>,
    sigma: f64,
}

impl SpacingSample {
    /// Wraps explicit values; `sigma` is taken to be their sum.
    pub fn new(spacings: Vec<f64>) -> Result<Self> {
        if spacings.is_empty() {
            return Err(Error::invalid("a spacing sample needs at least one entry"));
        }
        if let Some(bad) = spacings.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::invalid(format!("spacing {bad} is not a finite non-negative value")));
        }
        let sigma = spacings.iter().sum();
        Ok(Self { spacings, sigma })
    }

    /// Wraps explicit values and checks they sum to `sigma`.
    pub fn with_sigma(spacings: Vec<f64>, sigma: f64) -> Result<Self> {
        let mut sample = Self::new(spacings)?;
        if !(sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        if (sample.sigma - sigma).abs() > SUM_REL_TOL * sigma {
            return Err(Error::invalid(format!(
                "spacings sum to {} but sigma is {sigma}",
                sample.sigma
            )));
        }
        sample.sigma = sigma;
        Ok(sample)
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn k(&self) -> usize {
        self.spacings.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.spacings
    }

    fn prefix_sums(&self, wrap: bool) -> Vec<f64> {
        let k = self.k();
        let len = if wrap { 2 * k } else { k };
        let mut prefix = Vec::with_capacity(len + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for i in 0..len {
            acc += self.spacings[i % k];
            prefix.push(acc);
        }
        prefix
    }

    fn check_window(&self, d: usize) -> Result<()> {
        if d == 0 || d > self.k() {
            return Err(Error::invalid(format!(
                "window {d} must lie in [1, {}]",
                self.k()
            )));
        }
        Ok(())
    }
}

/// Draws `k` uniform spacings of `[0, sigma]` from `stream`.
pub fn sample_uniform_spacings(k: usize, sigma: f64, stream: RandomStream) -> Result<SpacingSample> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let mut rng = stream.rng();
    let mut values: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = values.iter().sum();
    // Same operation order for every sigma, so sigma acts as an exact scale.
    for v in values.iter_mut() {
        *v = *v / total * sigma;
    }
    Ok(SpacingSample {
        spacings: values,
        sigma,
    })
}

/// Largest of the `k/m` disjoint blocks of `m` consecutive spacings.
pub fn max_nonoverlapping_m_spacing(sample: &SpacingSample, m: usize) -> Result<f64> {
    let k = sample.k();
    if m == 0 || !k.is_multiple_of(m) {
        return Err(Error::invalid(format!("block size {m} does not divide k = {k}")));
    }
    Ok(sample
        .spacings
        .chunks(m)
        .map(|block| block.iter().sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest sum of `d` consecutive spacings on the line.
pub fn max_d_spacing_line(sample: &SpacingSample, d: usize) -> Result<f64> {
    sample.check_window(d)?;
    let prefix = sample.prefix_sums(false);
    Ok(line_max(&prefix, sample.k(), d))
}

/// Largest sum of `d` consecutive spacings on the circle (indices wrap mod k).
pub fn max_d_spacing_circle(sample: &SpacingSample, d: usize) -> Result<f64> {
    sample.check_window(d)?;
    let prefix = sample.prefix_sums(true);
    Ok(circle_max(&prefix, sample.k(), d))
}

/// Circular maxima for every window width `1..=k`, index `w-1` holding width `w`.
pub fn circle_maxima_all(sample: &SpacingSample) -> Vec<f64> {
    let prefix = sample.prefix_sums(true);
    (1..=sample.k())
        .map(|w| circle_max(&prefix, sample.k(), w))
        .collect()
}

fn line_max(prefix: &[f64], k: usize, d: usize) -> f64 {
    (0..=k - d)
        .map(|i| prefix[i + d] - prefix[i])
        .fold(f64::NEG_INFINITY, f64::max)
}

// The non-wrapping windows are computed exactly as in `line_max`, so the
// circular maximum can never fall below the line maximum through rounding.
fn circle_max(prefix: &[f64], k: usize, d: usize) -> f64 {
    let line = line_max(prefix, k, d);
    (k - d + 1..k)
        .map(|i| prefix[i + d] - prefix[i])
        .fold(line, f64::max)
}

/// Number of spacings `s` with `lo <= s <= hi`.
pub fn count_spacings_in_range(sample: &SpacingSample, lo: f64, hi: f64) -> Result<usize> {
    if !(lo >= 0.0) || lo > hi {
        return Err(Error::invalid(format!("need 0 <= lo <= hi, got [{lo}, {hi}]")));
    }
    Ok(sample
        .spacings
        .iter()
        .filter(|&&s| lo <= s && s <= hi)
        .count())
}
