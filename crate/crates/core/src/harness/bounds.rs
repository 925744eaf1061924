//! Closed-form diagnostics: minimax lower bound, the epoch-length
//! assumption and the three-term regret upper bound (constants set to 1).

use serde::Serialize;

use crate::detection::delay_constant_form;
use crate::environments::InstanceSpec;
use crate::estimators::HeavyTailParams;

/// `(1/25) (K epochs)^(e/(1+e)) (v T)^(1/(1+e))`, where `epochs` counts
/// stationary stretches.
pub fn lower_bound(k: usize, epochs: usize, horizon: u64, ht: &HeavyTailParams) -> f64 {
    let q = ht.order();
    ((k * epochs) as f64).powf(ht.epsilon / q) * (ht.v * horizon as f64).powf(1.0 / q) / 25.0
}

/// Per-epoch delay allowance
/// `L_j = 6 * 236^((1+e)/e) v^(1/e) (lnln(1/d) + ln T) / d^((1+e)/e)`
/// for the smoothed change `d`; zero when `d` is infinite.
pub fn delay_allowance(delta_tilde: f64, horizon: u64, ht: &HeavyTailParams) -> f64 {
    if delta_tilde == f64::INFINITY {
        return 0.0;
    }
    if delta_tilde <= 0.0 {
        return f64::INFINITY;
    }
    delay_constant_form(236.0, delta_tilde, horizon, ht.epsilon, ht.v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRequirement {
    pub epoch: usize,
    pub length: u64,
    pub required: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub holds: bool,
    pub epochs: Vec<EpochRequirement>,
}

/// Every epoch must satisfy `|E_j| >= 2 n_min + 2 ceil(L_j K / eta)`.
pub fn check_assumption(spec: &InstanceSpec, n_min: u64, eta: f64) -> AssumptionReport {
    let gaps = spec.gaps();
    let k = spec.k as f64;
    let epochs: Vec<EpochRequirement> = gaps
        .delta_min_tilde_per_epoch
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let l = delay_allowance(d, spec.horizon, &spec.heavy_tail);
            let required = 2.0 * n_min as f64 + 2.0 * (l * k / eta).ceil();
            let length = spec.epoch_len(j);
            EpochRequirement { epoch: j, length, required, satisfied: (length as f64) >= required }
        })
        .collect();
    AssumptionReport { holds: epochs.iter().all(|e| e.satisfied), epochs }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// Detection-delay term.
    pub term_a: f64,
    /// Stationary-policy term.
    pub term_b: f64,
    /// Forced-exploration term.
    pub term_c: f64,
    pub total: f64,
    /// Set when a zero change makes the delay term infinite.
    pub infinite: bool,
    pub lower_bound: f64,
}

/// Order-level upper bound
/// `(A) sum_j v^(1/e) ln T ceil(K/eta) Dmax_j / d_j^((1+e)/e)`,
/// `(B) sum_j sum_{i: D_i > 0} v^(1/e) ln|E_j| / D_i^(1/e)`,
/// `(C) eta sum_j |E_j| Dmax_j`.
pub fn theoretical_bounds(spec: &InstanceSpec, eta: f64) -> BoundReport {
    let ht = spec.heavy_tail;
    let e = ht.epsilon;
    let p = (1.0 + e) / e;
    let vpow = ht.v.powf(1.0 / e);
    let ln_t = (spec.horizon as f64).ln();
    let g = spec.gaps();
    let ceil_k = (spec.k as f64 / eta).ceil();
    let mut term_a = 0.0;
    let mut term_b = 0.0;
    let mut term_c = 0.0;
    for j in 0..spec.epoch_count() {
        let d = g.delta_min_tilde_per_epoch[j];
        let dmax = g.max_gap_per_epoch[j];
        if d.is_finite() {
            term_a += if d > 0.0 { vpow * ln_t * ceil_k * dmax / d.powf(p) } else { f64::INFINITY };
        }
        let len = spec.epoch_len(j) as f64;
        for &gap in &g.gaps[j] {
            if gap > 0.0 {
                term_b += vpow * len.ln() / gap.powf(1.0 / e);
            }
        }
        term_c += eta * len * dmax;
    }
    BoundReport {
        term_a,
        term_b,
        term_c,
        total: term_a + term_b + term_c,
        infinite: term_a.is_infinite(),
        lower_bound: lower_bound(spec.k, spec.epoch_count(), spec.horizon, &ht),
    }
}
