//! Mean estimators for heavy-tailed samples.
//!
//! The Catoni-type estimator solves `sum_i phi(lambda_i (X_i - m)) = 0` for `m`
//! with the influence function
//! `phi(x) = sign(x) * ln(1 + |x| + |x|^(1+eps) / (1+eps))`.
//! Median-of-means and the plain empirical mean are provided for the index
//! policies and for baselines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Moment class of the reward distributions: centered `(1+epsilon)`-moment
/// bounded by `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeavyTailParams {
    pub epsilon: f64,
    pub v: f64,
}

impl HeavyTailParams {
    pub fn new(epsilon: f64, v: f64) -> Result<Self> {
        let p = Self { epsilon, v };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            problems.push(format!("epsilon must lie in (0, 1], got {}", self.epsilon));
        }
        if !(self.v > 0.0 && self.v.is_finite()) {
            problems.push(format!("v must be positive and finite, got {}", self.v));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Moment order `1 + epsilon`.
    pub fn order(&self) -> f64 {
        1.0 + self.epsilon
    }

    /// Scale `v^(1/(1+epsilon))`, the natural unit of the noise.
    pub fn scale(&self) -> f64 {
        self.v.powf(1.0 / self.order())
    }
}

/// Bisection settings shared by the estimator and the confidence sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Final bracket width.
    pub tolerance: f64,
    /// Roots are searched in `[-search_radius, search_radius]`.
    pub search_radius: f64,
    pub max_iterations: u32,
}

impl SolverConfig {
    pub const DEFAULT_TOLERANCE: f64 = 1e-9;

    pub fn new(tolerance: f64, search_radius: f64) -> Self {
        let span = (2.0 * search_radius / tolerance).max(2.0);
        Self {
            tolerance,
            search_radius,
            max_iterations: span.log2().ceil() as u32 + 4,
        }
    }

    /// Radius `|max| + |min| + v^(1/(1+eps)) (ln T)^(eps/(1+eps)) + 1` for a data set.
    pub fn default_radius(min: f64, max: f64, ht: &HeavyTailParams, horizon: u64) -> f64 {
        let log_t = (horizon.max(2) as f64).ln();
        max.abs() + min.abs() + ht.scale() * log_t.powf(ht.epsilon / ht.order()) + 1.0
    }

    /// Solver with the default tolerance and the data-driven radius.
    pub fn for_samples(samples: &[f64], ht: &HeavyTailParams, horizon: u64) -> Self {
        let (min, max) = min_max(samples);
        Self::new(Self::DEFAULT_TOLERANCE, Self::default_radius(min, max, ht, horizon))
    }
}

pub(crate) fn min_max(samples: &[f64]) -> (f64, f64) {
    samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Influence function `sign(x) ln(1 + |x| + |x|^(1+eps)/(1+eps))`.
#[inline]
pub fn influence(x: f64, epsilon: f64) -> f64 {
    let a = x.abs();
    let q = 1.0 + epsilon;
    let tail = if epsilon == 1.0 { 0.5 * a * a } else { a.powf(q) / q };
    (a + tail).ln_1p().copysign(x)
}

/// `sum_i phi(lambda_i (X_i - m))`.
pub fn estimating_sum(samples: &[f64], lambdas: &[f64], m: f64, epsilon: f64) -> f64 {
    samples
        .iter()
        .zip(lambdas)
        .map(|(&x, &l)| influence(l * (x - m), epsilon))
        .sum()
}

/// `sum_i phi(lambda (X_i - m))` for a constant weight.
#[inline]
pub fn estimating_sum_const(samples: &[f64], lambda: f64, m: f64, epsilon: f64) -> f64 {
    let mut acc = 0.0;
    if epsilon == 1.0 {
        for &x in samples {
            let y = lambda * (x - m);
            let a = y.abs();
            acc += (a + 0.5 * a * a).ln_1p().copysign(y);
        }
    } else {
        for &x in samples {
            acc += influence(lambda * (x - m), epsilon);
        }
    }
    acc
}

/// Bisection on a nonincreasing `g` for the crossing of `level`.
///
/// Requires `g(lo) > level >= g(hi)`; returns the final bracket `(lo, hi)`
/// with the same property.
pub fn bisect_decreasing<F: FnMut(f64) -> f64>(
    mut g: F,
    level: f64,
    mut lo: f64,
    mut hi: f64,
    tolerance: f64,
    max_iterations: u32,
) -> (f64, f64) {
    let mut iter = 0;
    while hi - lo > tolerance && iter < max_iterations {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }
    (lo, hi)
}

/// Catoni-type estimate with per-sample weights `lambdas`.
pub fn catoni_estimate(
    samples: &[f64],
    lambdas: &[f64],
    epsilon: f64,
    solver: &SolverConfig,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if samples.len() != lambdas.len() {
        return Err(Error::InvalidParameter(format!(
            "{} samples but {} weights",
            samples.len(),
            lambdas.len()
        )));
    }
    if let Some(i) = lambdas.iter().position(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter(format!("weight {i} is not positive")));
    }
    let r = solver.search_radius;
    let f = |m: f64| estimating_sum(samples, lambdas, m, epsilon);
    let (f_lo, f_hi) = (f(-r), f(r));
    if f_lo < 0.0 || f_hi > 0.0 {
        return Err(Error::NoRootInRadius { radius: r });
    }
    if f_lo == 0.0 {
        return Ok(-r);
    }
    let (lo, hi) = bisect_decreasing(f, 0.0, -r, r, solver.tolerance, solver.max_iterations);
    Ok(0.5 * (lo + hi))
}

/// Default median-of-means block count `min(n, ceil(8 ln(T^2)) + 1)`.
pub fn mom_block_count(n: usize, horizon: u64) -> usize {
    let t = horizon.max(2) as f64;
    let k = (8.0 * (t * t).ln()).ceil() as usize + 1;
    k.min(n).max(1)
}

/// Median of the means of `block_count` contiguous, near-equal blocks.
///
/// The first `n mod k` blocks hold one extra sample. With an even number of
/// blocks the lower median is returned.
pub fn median_of_means(samples: &[f64], block_count: usize) -> Result<f64> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if block_count == 0 || block_count > n {
        return Err(Error::InvalidParameter(format!(
            "block count {block_count} must lie in 1..={n}"
        )));
    }
    let base = n / block_count;
    let extra = n % block_count;
    let mut means = Vec::with_capacity(block_count);
    let mut start = 0;
    for b in 0..block_count {
        let len = base + usize::from(b < extra);
        let block = &samples[start..start + len];
        means.push(block.iter().sum::<f64>() / len as f64);
        start += len;
    }
    let mid = (block_count - 1) / 2;
    let (_, median, _) = means.select_nth_unstable_by(mid, f64::total_cmp);
    Ok(*median)
}

/// Arithmetic mean.
pub fn empirical_mean(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}
