//! Independent reimplementations shared by the oracle and acceptance
//! targets.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use robust_cpd::environments::{InstanceSpec, NoiseFamily};
use robust_cpd::estimators::HeavyTailParams;

/// `sign(x) ln(1 + |x| + |x|^(1+e)/(1+e))`, written out independently.
pub fn phi(x: f64, e: f64) -> f64 {
    let a = x.abs();
    let v = (1.0 + a + a.powf(1.0 + e) / (1.0 + e)).ln();
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Nested grid scan for the crossing of `level` by a nonincreasing `g` on
/// `[lo, hi]`: each pass keeps the last grid cell with `g > level`.
pub fn grid_crossing(g: impl Fn(f64) -> f64, level: f64, mut lo: f64, mut hi: f64, resolution: f64) -> (f64, f64) {
    while hi - lo > resolution {
        let steps = 200;
        let h = (hi - lo) / steps as f64;
        let mut k = 0;
        while k < steps && g(lo + (k + 1) as f64 * h) > level {
            k += 1;
        }
        let a = lo + k as f64 * h;
        lo = a;
        hi = (a + h).min(hi);
    }
    (lo, hi)
}

/// Independent `(lambda, threshold)` for count `n`.
pub fn cell_constants(n: u64, gamma: f64, e: f64, v: f64) -> (f64, f64, f64) {
    let j = if n <= 1 { 0.0 } else { ((n as f64).ln().ceil() - 1.0).max(0.0) };
    let gj = gamma / ((j + 1.0) * (j + 1.0));
    let lam = ((2.0 / gj).ln() * (-j).exp() / v).powf(1.0 / (1.0 + e));
    let b = v / (1.0 + e) * n as f64 * lam.powf(1.0 + e) + (2.0 / gj).ln();
    (lam, b, gj)
}

/// Instance with random means, breakpoints and Gaussian noise.
pub fn random_instance(rng: &mut ChaCha8Rng) -> InstanceSpec {
    let k = rng.random_range(2..6);
    let epochs = rng.random_range(1..7);
    let horizon = rng.random_range(100..5000u64);
    let e = if rng.random_bool(0.3) { 1.0 } else { rng.random_range(0.1..1.0) };
    let v = rng.random_range(0.5..4.0);
    let mut cuts: Vec<u64> = Vec::new();
    while cuts.len() + 1 < epochs {
        let c = rng.random_range(1..horizon);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let means: Vec<Vec<f64>> = (0..cuts.len() + 1)
        .map(|_| {
            (0..k)
                .map(|_| {
                    // repeated values produce zero changes now and then
                    if rng.random_bool(0.15) {
                        0.5
                    } else {
                        (rng.random_range(0.0..3.0f64) * 100.0).round() / 100.0
                    }
                })
                .collect()
        })
        .collect();
    let ht = HeavyTailParams::new(e, v).unwrap();
    let sigma = v.powf(1.0 / (1.0 + e)) * 0.1;
    InstanceSpec::from_means(&means, cuts, horizon, ht, NoiseFamily::Gaussian { sigma }).unwrap()
}

pub fn rel_close(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

/// Reference values recomputed from the instance means.
pub struct Reference {
    pub lower: f64,
    pub required: Vec<f64>,
    pub holds: bool,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn reference(spec: &InstanceSpec, n_min: u64, eta: f64) -> Reference {
    let e = spec.heavy_tail.epsilon;
    let v = spec.heavy_tail.v;
    let t = spec.horizon as f64;
    let k = spec.k as f64;
    let means: Vec<Vec<f64>> =
        spec.arms_per_epoch.iter().map(|row| row.iter().map(|d| d.mean()).collect()).collect();
    let m = means.len();
    let mut bounds: Vec<u64> = vec![0];
    bounds.extend(&spec.breakpoints);
    bounds.push(spec.horizon);
    let len: Vec<f64> = (0..m).map(|j| (bounds[j + 1] - bounds[j]) as f64).collect();

    let lower = (k * m as f64).powf(e / (1.0 + e)) * (v * t).powf(1.0 / (1.0 + e)) / 25.0;

    // smallest change entering each epoch; the first has none
    let dmin: Vec<f64> = (0..m)
        .map(|j| {
            if j == 0 {
                f64::INFINITY
            } else {
                (0..spec.k).map(|i| (means[j][i] - means[j - 1][i]).abs()).fold(f64::INFINITY, f64::min)
            }
        })
        .collect();
    let dtilde: Vec<f64> = (0..m).map(|j| if j == 0 { dmin[0] } else { dmin[j - 1].min(dmin[j]) }).collect();
    let p = (1.0 + e) / e;
    let l_of = |d: f64| -> f64 {
        if d == f64::INFINITY {
            0.0
        } else if d == 0.0 {
            f64::INFINITY
        } else {
            let lnln = if (1.0 / d).ln() > 1.0 { (1.0 / d).ln().ln() } else { 0.0 };
            6.0 * 236f64.powf(p) * v.powf(1.0 / e) * (lnln + t.ln()) / d.powf(p)
        }
    };
    let required: Vec<f64> = dtilde.iter().map(|&d| 2.0 * n_min as f64 + 2.0 * (l_of(d) * k / eta).ceil()).collect();
    let holds = required.iter().zip(&len).all(|(r, l)| l >= r);

    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for j in 0..m {
        let best = means[j].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dmax = means[j].iter().map(|x| best - x).fold(0.0, f64::max);
        let d = dtilde[j];
        if d.is_finite() {
            a += if d > 0.0 { v.powf(1.0 / e) * t.ln() * (k / eta).ceil() * dmax / d.powf(p) } else { f64::INFINITY };
        }
        for &x in &means[j] {
            if best - x > 0.0 {
                b += v.powf(1.0 / e) * len[j].ln() / (best - x).powf(1.0 / e);
            }
        }
        c += eta * len[j] * dmax;
    }
    Reference { lower, required, holds, a, b, c }
}


/// Sum of squared deviations from the mean.
pub fn segment_sse(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum()
}

/// SSE of the segmentation ending segments at `ends` (the last segment
/// runs to the end of `series`).
pub fn direct_sse(series: &[f64], ends: &[usize]) -> f64 {
    let mut start = 0;
    let mut total = 0.0;
    for &end in ends.iter().chain(std::iter::once(&series.len())) {
        total += segment_sse(&series[start..end]);
        start = end;
    }
    total
}

/// Minimum SSE over all C(n-1, k-1) placements of the cuts.
pub fn brute_force_sse(series: &[f64], k: usize) -> f64 {
    fn go(series: &[f64], from: usize, cuts_left: usize, cuts: &mut Vec<usize>, best: &mut f64) {
        if cuts_left == 0 {
            *best = best.min(direct_sse(series, cuts));
            return;
        }
        for c in from..series.len() {
            cuts.push(c);
            go(series, c + 1, cuts_left - 1, cuts, best);
            cuts.pop();
        }
    }
    let mut best = f64::INFINITY;
    go(series, 1, k - 1, &mut Vec::new(), &mut best);
    best
}
