//! Discrete power-law fitting for degree samples.
//!
//! The exponent comes from the discrete maximum-likelihood estimator
//! `alpha = 1 + n / sum(ln(x_i / (x_min - 1/2)))` over the tail at or above
//! `x_min`, and `x_min` itself is chosen to minimize the Kolmogorov-Smirnov
//! distance between the tail's empirical CDF and the fitted CDF.

use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// Fewest positive samples accepted by the fitter.
pub const MIN_SAMPLES: usize = 10;
/// Fewest tail samples a cutoff candidate may keep. Tiny tails make the KS
/// distance meaninglessly small.
pub const MIN_TAIL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PowerLawError {
    #[error("need at least {MIN_SAMPLES} samples >= 1, got {0}")]
    TooFewSamples(usize),
    #[error("all sample values are identical")]
    DegenerateSample,
}

/// Fitted exponent, cutoff, tail size, and the KS distance at the chosen
/// cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerLawFit {
    pub alpha: f64,
    pub x_min: u64,
    pub n_tail: usize,
    pub ks_distance: f64,
}

impl PowerLawFit {
    /// Rough standard error of the exponent estimate.
    pub fn alpha_std_error(&self) -> f64 {
        (self.alpha - 1.0) / math::sqrt(self.n_tail as f64)
    }
}

/// MLE exponent for the tail at a fixed cutoff. The tail must be non-empty
/// and `x_min >= 1`.
pub fn alpha_mle(tail: &[u64], x_min: u64) -> f64 {
    debug_assert!(x_min >= 1);
    debug_assert!(!tail.is_empty());
    let shift = x_min as f64 - 0.5;
    let log_sum: f64 = tail.iter().map(|&x| math::ln(x as f64 / shift)).sum();
    1.0 + tail.len() as f64 / log_sum
}

/// Model CDF at integer `x` (inclusive) for the shifted-continuous
/// approximation of the discrete power law.
fn model_cdf(x: u64, x_min: u64, alpha: f64) -> f64 {
    let shift = x_min as f64 - 0.5;
    1.0 - math::powf((x as f64 + 0.5) / shift, 1.0 - alpha)
}

/// KS distance between the tail's empirical CDF and the fitted one.
///
/// `tail` must be ascending. Both the inclusive step and the value just below
/// each observed atom are checked, which is where the supremum of the
/// difference can sit for step functions.
fn ks_distance(tail: &[u64], x_min: u64, alpha: f64) -> f64 {
    let m = tail.len() as f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    let mut below = 0usize;
    while i < tail.len() {
        let x = tail[i];
        let mut j = i;
        while j < tail.len() && tail[j] == x {
            j += 1;
        }
        let cdf_before = below as f64 / m;
        let cdf_at = j as f64 / m;
        let lower = if x == x_min {
            0.0
        } else {
            model_cdf(x - 1, x_min, alpha)
        };
        let upper = model_cdf(x, x_min, alpha);
        worst = worst
            .max(math::abs(cdf_before - lower))
            .max(math::abs(cdf_at - upper));
        below = j;
        i = j;
    }
    worst
}

/// Fits the exponent with the cutoff fixed at `x_min` (clamped to >= 1).
pub fn fit_power_law_at(samples: &[u64], x_min: u64) -> Result<PowerLawFit, PowerLawError> {
    let x_min = x_min.max(1);
    let mut tail: Vec<u64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    if tail.len() < MIN_SAMPLES {
        return Err(PowerLawError::TooFewSamples(tail.len()));
    }
    tail.sort_unstable();
    if tail.first() == tail.last() {
        return Err(PowerLawError::DegenerateSample);
    }
    let alpha = alpha_mle(&tail, x_min);
    Ok(PowerLawFit {
        alpha,
        x_min,
        n_tail: tail.len(),
        ks_distance: ks_distance(&tail, x_min, alpha),
    })
}

/// Fits exponent and cutoff over all candidate cutoffs.
pub fn fit_power_law(samples: &[u64]) -> Result<PowerLawFit, PowerLawError> {
    let mut values: Vec<u64> = samples.iter().copied().filter(|&x| x >= 1).collect();
    if values.len() < MIN_SAMPLES {
        return Err(PowerLawError::TooFewSamples(values.len()));
    }
    values.sort_unstable();
    if values.first() == values.last() {
        return Err(PowerLawError::DegenerateSample);
    }

    let n = values.len();
    // Suffix sums of ln(x) let each candidate's MLE come out in O(1).
    let mut suffix_ln = alloc::vec![0.0f64; n + 1];
    for i in (0..n).rev() {
        suffix_ln[i] = suffix_ln[i + 1] + math::ln(values[i] as f64);
    }

    let mut best: Option<PowerLawFit> = None;
    let mut start = 0usize;
    while start < n {
        let x_min = values[start];
        let mut end = start;
        while end < n && values[end] == x_min {
            end += 1;
        }
        let tail = &values[start..];
        let m = tail.len();
        // Tail needs enough mass and at least two distinct values.
        if m >= MIN_TAIL && tail[m - 1] != x_min {
            let shift = x_min as f64 - 0.5;
            let log_sum = suffix_ln[start] - m as f64 * math::ln(shift);
            let alpha = 1.0 + m as f64 / log_sum;
            let d = ks_distance(tail, x_min, alpha);
            let better = match &best {
                None => true,
                Some(b) => d < b.ks_distance,
            };
            if better {
                best = Some(PowerLawFit {
                    alpha,
                    x_min,
                    n_tail: m,
                    ks_distance: d,
                });
            }
        }
        start = end;
    }
    best.ok_or(PowerLawError::DegenerateSample)
}
