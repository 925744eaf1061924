//! Change detection from a family of confidence sequences started at
//! successive samples.
//!
//! Every confidence sequence covers the mean of the samples since its start.
//! If the stream is stationary they all share a point; an empty intersection
//! signals a change. For intervals on the line the family intersection is
//! empty exactly when the largest lower end exceeds the smallest upper end.

use crate::confseq::{
    BernsteinCs, BernsteinCsConfig, CatoniCs, CatoniCsConfig, ConfidenceInterval,
};
use crate::error::{Error, Result};

/// Which confidence sequence the detector stacks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsKind {
    Catoni(CatoniCsConfig),
    Bernstein(BernsteinCsConfig),
}

#[derive(Debug, Clone)]
enum AnyCs {
    Catoni(CatoniCs),
    Bernstein(BernsteinCs),
}

impl AnyCs {
    fn start(&self) -> u64 {
        match self {
            AnyCs::Catoni(c) => c.start_index,
            AnyCs::Bernstein(c) => c.start_index,
        }
    }

    fn update(&mut self, view: &[f64]) -> ConfidenceInterval {
        match self {
            AnyCs::Catoni(c) => c.update(view),
            AnyCs::Bernstein(c) => c.update(view),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub kind: CsKind,
    /// When set, new sequences start only at ordinals on the grid
    /// `{ceil(r^k) : k >= 0}` for this ratio `r > 1`.
    pub thinning: Option<f64>,
}

/// True when `ordinal` (1-based) lies on the geometric start grid of ratio `r`.
pub fn on_start_grid(ordinal: u64, ratio: f64) -> bool {
    if ordinal <= 1 {
        return ordinal == 1;
    }
    // smallest k with r^k >= ordinal - 1 gives the unique grid point above ordinal - 1
    let x = ordinal as f64;
    let k = ((x - 1.0).ln() / ratio.ln()).floor();
    let mut k = k.max(0.0) as i32;
    loop {
        let g = ratio.powi(k).ceil();
        if g > x {
            return false;
        }
        if g == x {
            return true;
        }
        k += 1;
    }
}

/// Stack of confidence sequences over one stream.
#[derive(Debug, Clone)]
pub struct DetectorState {
    config: DetectorConfig,
    samples: Vec<f64>,
    active: Vec<AnyCs>,
    max_lower: f64,
    min_upper: f64,
    tripped_at: Option<u64>,
}

impl DetectorState {
    pub fn new(config: DetectorConfig) -> Self {
        Self {
            config,
            samples: Vec::new(),
            active: Vec::new(),
            max_lower: f64::NEG_INFINITY,
            min_upper: f64::INFINITY,
            tripped_at: None,
        }
    }

    pub fn samples_seen(&self) -> u64 {
        self.samples.len() as u64
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    pub fn tripped_at(&self) -> Option<u64> {
        self.tripped_at
    }

    /// Current `(max lower, min upper)` over the active sequences.
    pub fn envelope(&self) -> (f64, f64) {
        (self.max_lower, self.min_upper)
    }

    /// Running intervals of the active sequences, keyed by start index.
    pub fn intervals(&self) -> Vec<(u64, ConfidenceInterval)> {
        self.active
            .iter()
            .map(|cs| {
                let ci = match cs {
                    AnyCs::Catoni(c) => c.running(),
                    AnyCs::Bernstein(c) => c.running(),
                };
                (cs.start(), ci)
            })
            .collect()
    }

    pub fn reset(&mut self) {
        self.samples.clear();
        self.active.clear();
        self.max_lower = f64::NEG_INFINITY;
        self.min_upper = f64::INFINITY;
        self.tripped_at = None;
    }

    /// Feeds one sample. When `start_new_cs` is set (and the ordinal is on the
    /// start grid in thinned mode) a new sequence starts at this sample.
    /// Returns the 1-based ordinal at which the intersection became empty.
    pub fn step(&mut self, sample: f64, start_new_cs: bool) -> Result<Option<u64>> {
        if let Some(t) = self.tripped_at {
            return Err(Error::SteppedAfterTrip(t));
        }
        self.samples.push(sample);
        let ordinal = self.samples.len() as u64;
        let start = start_new_cs && self.config.thinning.is_none_or(|r| on_start_grid(ordinal, r));
        if start {
            let idx = ordinal - 1;
            self.active.push(match self.config.kind {
                CsKind::Catoni(c) => AnyCs::Catoni(CatoniCs::new(idx, c)),
                CsKind::Bernstein(c) => AnyCs::Bernstein(BernsteinCs::new(idx, c)),
            });
        }
        let mut max_lower = f64::NEG_INFINITY;
        let mut min_upper = f64::INFINITY;
        for cs in &mut self.active {
            let view = &self.samples[cs.start() as usize..];
            let ci = cs.update(view);
            max_lower = max_lower.max(ci.lower);
            min_upper = min_upper.min(ci.upper);
        }
        self.max_lower = max_lower;
        self.min_upper = min_upper;
        if max_lower > min_upper {
            self.tripped_at = Some(ordinal);
            return Ok(Some(ordinal));
        }
        Ok(None)
    }
}

/// Whether a family of intervals has empty intersection. On the line this
/// holds iff some pair is disjoint, i.e. iff the largest lower end exceeds the
/// smallest upper end.
pub fn intersection_is_empty(intervals: &[ConfidenceInterval]) -> bool {
    let max_lower = intervals.iter().map(|c| c.lower).fold(f64::NEG_INFINITY, f64::max);
    let min_upper = intervals.iter().map(|c| c.upper).fold(f64::INFINITY, f64::min);
    max_lower > min_upper
}

/// `ceil(68 (1+eps)/eps ln T)`, the count at which a sequence is guaranteed
/// to be informative.
pub fn n_min_default(horizon: u64, epsilon: f64) -> u64 {
    n_min_from_log_horizon((horizon.max(1) as f64).ln(), epsilon)
}

pub fn n_min_from_log_horizon(log_horizon: f64, epsilon: f64) -> u64 {
    (68.0 * (1.0 + epsilon) / epsilon * log_horizon).ceil() as u64
}

/// Worst-case detection delay
/// `6 * 472^((1+e)/e) v^(1/e) (lnln(1/delta) + ln T) / delta^((1+e)/e)`,
/// with `lnln(1/delta)` floored at 0.
pub fn delay_bound(delta: f64, horizon: u64, epsilon: f64, v: f64) -> f64 {
    delay_constant_form(472.0, delta, horizon, epsilon, v)
}

pub(crate) fn delay_constant_form(c: f64, delta: f64, horizon: u64, epsilon: f64, v: f64) -> f64 {
    let p = (1.0 + epsilon) / epsilon;
    let ln_t = (horizon.max(1) as f64).ln();
    let lnln = floored_lnln(delta);
    6.0 * c.powf(p) * v.powf(1.0 / epsilon) * (lnln + ln_t) / delta.powf(p)
}

/// `max(0, ln ln(1/delta))`, zero whenever `ln(1/delta) <= 1`.
pub(crate) fn floored_lnln(delta: f64) -> f64 {
    let l = (1.0 / delta).ln();
    if l > 1.0 {
        l.ln()
    } else {
        0.0
    }
}
