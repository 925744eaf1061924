//! Per-trial pseudo-regret bookkeeping.
//!
//! Each round adds the gap of the played arm in the current epoch. The same
//! total is recoverable from the pull counts per epoch and arm; both sides
//! are summed exactly so the identity holds bit for bit.

use serde::{Deserialize, Serialize};

/// Correctly rounded sum of finite floats (Shewchuk partials).
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut n) = partials.len().checked_sub(1) else {
        return 0.0;
    };
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretLedger {
    pub seed: u64,
    /// Gap of the played arm in each round.
    pub per_round: Vec<f64>,
    /// `pulls[j][i]`: pulls of arm `i` during epoch `j`.
    pub pulls: Vec<Vec<u64>>,
    pub detection_rounds: Vec<u64>,
}

impl RegretLedger {
    pub fn new(seed: u64, epochs: usize, k: usize, horizon: u64) -> Self {
        Self {
            seed,
            per_round: Vec::with_capacity(horizon as usize),
            pulls: vec![vec![0; k]; epochs],
            detection_rounds: Vec::new(),
        }
    }

    pub fn record(&mut self, epoch: usize, arm: usize, gap: f64) {
        self.per_round.push(gap);
        self.pulls[epoch][arm] += 1;
    }

    /// Running sum of the per-round increments.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.per_round
            .iter()
            .map(|g| {
                acc += g;
                acc
            })
            .collect()
    }

    /// Exact total of the per-round increments.
    pub fn total(&self) -> f64 {
        exact_sum(self.per_round.iter().copied())
    }

    /// Exact `sum_j sum_i gap[j][i] * pulls[j][i]`.
    pub fn total_from_counts(&self, gaps: &[Vec<f64>]) -> f64 {
        let mut terms = Vec::new();
        for (row, counts) in gaps.iter().zip(&self.pulls) {
            for (&g, &n) in row.iter().zip(counts) {
                let nf = n as f64;
                let p = g * nf;
                terms.push(p);
                terms.push(g.mul_add(nf, -p));
            }
        }
        exact_sum(terms)
    }

    pub fn identity_holds(&self, gaps: &[Vec<f64>]) -> bool {
        self.total() == self.total_from_counts(gaps)
    }
}
