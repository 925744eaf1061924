//! Stitched Catoni-type confidence sequences and an empirical-Bernstein
//! baseline.
//!
//! Sample counts are split into geometric cells `e^j < n <= e^(j+1)` (with
//! `n = 1` in cell 0). Cell `j` runs at confidence `gamma_j = gamma / (j+1)^2`
//! with weight `Lambda_j = (ln(2/gamma_j) e^(-j) / v)^(1/(1+eps))`, applied to
//! every sample once the count reaches that cell. The interval at count `n` is
//! `{m : |sum_i phi(Lambda (X_i - m))| <= v/(1+eps) n Lambda^(1+eps) + ln(2/gamma_j)}`.

use crate::error::{Error, Result};
use crate::estimators::{HeavyTailParams, SolverConfig};

/// Closed interval `[lower, upper]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ConfidenceInterval {
    pub const TRIVIAL: Self = Self { lower: f64::NEG_INFINITY, upper: f64::INFINITY };

    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn is_trivial(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self { lower: self.lower.max(other.lower), upper: self.upper.min(other.upper) }
    }
}

/// Geometric stitching of per-cell confidence levels and weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StitchSchedule {
    pub gamma: f64,
    pub ht: HeavyTailParams,
}

impl StitchSchedule {
    pub fn new(gamma: f64, ht: HeavyTailParams) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        ht.validate()?;
        Ok(Self { gamma, ht })
    }

    /// Cell index `j` with `e^j < n <= e^(j+1)`; `n <= 1` maps to 0.
    pub fn cell_index(n: u64) -> u32 {
        if n <= 1 {
            return 0;
        }
        let c = (n as f64).ln().ceil() as u32;
        c.saturating_sub(1)
    }

    pub fn cell_gamma(&self, j: u32) -> f64 {
        let d = (j as f64) + 1.0;
        self.gamma / (d * d)
    }

    /// `ln(2 / gamma_j)`.
    pub fn cell_log_term(&self, j: u32) -> f64 {
        (2.0 / self.cell_gamma(j)).ln()
    }

    pub fn cell_lambda(&self, j: u32) -> f64 {
        let base = self.cell_log_term(j) * (-(j as f64)).exp() / self.ht.v;
        base.powf(1.0 / self.ht.order())
    }

    pub fn lambda_at(&self, n: u64) -> f64 {
        self.cell_lambda(Self::cell_index(n))
    }

    /// Threshold `v/(1+eps) n Lambda^(1+eps) + ln(2/gamma_cell)` for `n` equal weights.
    pub fn threshold(&self, n: u64, lambda: f64, gamma_cell: f64) -> f64 {
        let q = self.ht.order();
        self.ht.v / q * (n as f64) * lambda.powf(q) + (2.0 / gamma_cell).ln()
    }
}

/// Weight applied to every sample when the count is `n`.
pub fn lambda_at(n: u64, schedule: &StitchSchedule) -> f64 {
    schedule.lambda_at(n)
}

/// `(phi(y), phi'(y))` with `phi'(y) = (1 + |y|^e) / (1 + |y| + |y|^(1+e)/(1+e))`.
#[inline]
fn influence_and_slope(y: f64, epsilon: f64) -> (f64, f64) {
    let a = y.abs();
    let ae = if epsilon == 1.0 { a } else { a.powf(epsilon) };
    let inner = a + a * ae / (1.0 + epsilon);
    (inner.ln_1p().copysign(y), (1.0 + ae) / (1.0 + inner))
}

/// `(f(m), f'(m))` for the equal-weight estimating sum.
fn sum_and_slope(samples: &[f64], lambda: f64, m: f64, epsilon: f64) -> (f64, f64) {
    let mut f = 0.0;
    let mut d = 0.0;
    for &x in samples {
        let (v, s) = influence_and_slope(lambda * (x - m), epsilon);
        f += v;
        d += s;
    }
    (f, -lambda * d)
}

/// Root bracket of a nonincreasing `g` against `level`: `g(a) > level >= g(b)`.
#[derive(Debug, Clone, Copy)]
struct Bracket {
    a: f64,
    ga: f64,
    da: f64,
    b: f64,
    gb: f64,
    db: f64,
}

/// Safeguarded Newton iteration started at `start` inside the bracket.
/// Every evaluation shrinks the bracket; iteration stops once its width is
/// at most `tolerance`.
fn newton_bracketed<F: FnMut(f64) -> (f64, f64)>(
    mut eval: F,
    level: f64,
    mut br: Bracket,
    start: (f64, f64, f64),
    tolerance: f64,
    max_iterations: u32,
) -> Bracket {
    let (mut x, mut gx, mut dx) = start;
    let mut iter = 0;
    while br.b - br.a > tolerance && iter < max_iterations {
        iter += 1;
        let mut next = if dx < 0.0 { x - (gx - level) / dx } else { f64::NAN };
        if !(next > br.a && next < br.b) {
            next = br.a + 0.5 * (br.b - br.a);
        } else if (next - x).abs() < 0.5 * tolerance {
            // close the bracket from the other side of the estimate
            next = if gx > level { x + 0.5 * tolerance } else { x - 0.5 * tolerance };
            if !(next > br.a && next < br.b) {
                next = br.a + 0.5 * (br.b - br.a);
            }
        }
        if next <= br.a || next >= br.b {
            break;
        }
        let (g, d) = eval(next);
        x = next;
        gx = g;
        dx = d;
        if gx > level {
            br.a = x;
            br.ga = gx;
            br.da = dx;
        } else {
            br.b = x;
            br.gb = gx;
            br.db = dx;
        }
    }
    br
}

/// Endpoint search for `{m : |f(m)| <= bound}` on one data view.
struct EndpointSearch<'a> {
    samples: &'a [f64],
    lambda: f64,
    epsilon: f64,
    bound: f64,
    radius: f64,
    tolerance: f64,
    max_iterations: u32,
    data_min: f64,
    data_max: f64,
}

impl EndpointSearch<'_> {
    fn fd(&self, m: f64) -> (f64, f64) {
        sum_and_slope(self.samples, self.lambda, m, self.epsilon)
    }

    /// Smallest `m` with `f(m) <= bound`, rounded outward, starting from a
    /// point with known `(m, f(m), f'(m))` and `f(m) > bound` (or from
    /// `-radius`). Returns the endpoint with `f` and `f'` there.
    fn lower_from(&self, from: Option<(f64, f64, f64)>) -> (f64, f64, f64) {
        let (a, ga, da) = from.unwrap_or_else(|| {
            let (g, d) = self.fd(-self.radius);
            (-self.radius, g, d)
        });
        if ga <= self.bound {
            return (f64::NEG_INFINITY, f64::NAN, f64::NAN);
        }
        let b = self.data_max.max(a);
        let br = Bracket { a, ga, da, b, gb: f64::NAN, db: f64::NAN };
        let br = newton_bracketed(|m| self.fd(m), self.bound, br, (a, ga, da), self.tolerance, self.max_iterations);
        (br.a, br.ga, br.da)
    }

    /// Largest `m` with `f(m) >= -bound`, rounded outward.
    fn upper_from(&self, from: Option<(f64, f64, f64)>) -> (f64, f64, f64) {
        let level = -self.bound;
        let (b, gb, db) = from.unwrap_or_else(|| {
            let (g, d) = self.fd(self.radius);
            (self.radius, g, d)
        });
        if gb >= level {
            return (f64::INFINITY, f64::NAN, f64::NAN);
        }
        let a = self.data_min.min(b);
        // g(a) > level holds at the data minimum; a tie at level is pushed outward
        let br = Bracket { a, ga: f64::INFINITY, da: f64::NAN, b, gb, db };
        let br = newton_bracketed(|m| self.fd(m), level, br, (b, gb, db), self.tolerance, self.max_iterations);
        (br.b, br.gb, br.db)
    }

    fn lower(&self) -> f64 {
        self.lower_from(None).0
    }

    fn upper(&self) -> f64 {
        self.upper_from(None).0
    }
}

/// Interval at the current count `n = samples.len()` for confidence `gamma_cell`,
/// every sample weighted by `lambda_at(n)`. Endpoints beyond the solver radius
/// are reported as infinite.
pub fn catoni_interval(
    samples: &[f64],
    schedule: &StitchSchedule,
    gamma_cell: f64,
    solver: &SolverConfig,
) -> Result<ConfidenceInterval> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = samples.len() as u64;
    let lambda = schedule.lambda_at(n);
    let (data_min, data_max) = crate::estimators::min_max(samples);
    let search = EndpointSearch {
        samples,
        lambda,
        epsilon: schedule.ht.epsilon,
        bound: schedule.threshold(n, lambda, gamma_cell),
        radius: solver.search_radius.max(data_max.abs()).max(data_min.abs()),
        tolerance: solver.tolerance,
        max_iterations: solver.max_iterations,
        data_min,
        data_max,
    };
    Ok(ConfidenceInterval::new(search.lower(), search.upper()))
}

/// Sufficient condition for the interval to be nontrivial and of controlled
/// width at count `t` with equal weights `lambda_at(t)`:
/// `(sum l^(1+e))^(1/e) (sum l)^(-(1+e)/e) (5 v sum l^(1+e)/(1+e) + 2 ln(2/gamma_j) + 2 ln(2/theta)) <= e/(1+e)`.
pub fn feasibility_check(t: u64, schedule: &StitchSchedule, theta: f64) -> bool {
    if t == 0 {
        return false;
    }
    let eps = schedule.ht.epsilon;
    let q = schedule.ht.order();
    let j = StitchSchedule::cell_index(t);
    let lambda = schedule.cell_lambda(j);
    let tf = t as f64;
    let sum_pow = tf * lambda.powf(q);
    let sum_lin = tf * lambda;
    let lhs = sum_pow.powf(1.0 / eps)
        * sum_lin.powf(-q / eps)
        * (5.0 * schedule.ht.v * sum_pow / q
            + 2.0 * schedule.cell_log_term(j)
            + 2.0 * (2.0 / theta).ln());
    lhs <= eps / q
}

/// High-probability width bound
/// `68 v^(1/(1+e)) (1+e) ((ln(2/gamma) + 2 ln ln(e^2 t)) / t)^(e/(1+e))`.
pub fn width_bound(t: u64, schedule: &StitchSchedule) -> f64 {
    let ht = schedule.ht;
    let tf = t.max(1) as f64;
    let inner = ((2.0 / schedule.gamma).ln() + 2.0 * (2.0 + tf.ln()).ln()) / tf;
    68.0 * ht.scale() * ht.order() * inner.powf(ht.epsilon / ht.order())
}

/// When a confidence sequence starts reporting nontrivial intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsGate {
    /// Minimum own sample count.
    pub n_min: u64,
    /// When set, the feasibility condition with this `theta` must also hold.
    pub feasibility_theta: Option<f64>,
}

impl CsGate {
    pub fn open(&self, n: u64, schedule: &StitchSchedule) -> bool {
        n >= self.n_min.max(1)
            && self.feasibility_theta.is_none_or(|theta| feasibility_check(n, schedule, theta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatoniCsConfig {
    pub schedule: StitchSchedule,
    pub horizon: u64,
    pub tolerance: f64,
    pub gate: CsGate,
}

/// Estimating sum cached at a running endpoint.
#[derive(Debug, Clone, Copy)]
struct SumCache {
    at: f64,
    cell: u32,
    count: u64,
    sum: f64,
    slope: f64,
}

/// Running intersection of stitched Catoni intervals over the samples seen
/// since `start_index`.
///
/// The estimating sums at the running endpoints are cached, so an update
/// whose endpoints do not move costs O(1).
#[derive(Debug, Clone)]
pub struct CatoniCs {
    pub start_index: u64,
    config: CatoniCsConfig,
    running: ConfidenceInterval,
    count: u64,
    data_min: f64,
    data_max: f64,
    lower_cache: Option<SumCache>,
    upper_cache: Option<SumCache>,
}

impl CatoniCs {
    pub fn new(start_index: u64, config: CatoniCsConfig) -> Self {
        Self {
            start_index,
            config,
            running: ConfidenceInterval::TRIVIAL,
            count: 0,
            data_min: f64::INFINITY,
            data_max: f64::NEG_INFINITY,
            lower_cache: None,
            upper_cache: None,
        }
    }

    pub fn running(&self) -> ConfidenceInterval {
        self.running
    }

    pub fn sample_count(&self) -> u64 {
        self.count
    }

    /// Sum at `at` over `view`, extending the cache by the newest sample
    /// when it is still valid.
    fn cached_sum(cache: Option<SumCache>, at: f64, cell: u32, view: &[f64], search: &EndpointSearch) -> (f64, f64) {
        let n = view.len() as u64;
        match cache {
            Some(c) if c.at == at && c.cell == cell && c.count + 1 == n => {
                let x = view[view.len() - 1];
                let (v, d) = influence_and_slope(search.lambda * (x - at), search.epsilon);
                (c.sum + v, c.slope - search.lambda * d)
            }
            _ => search.fd(at),
        }
    }

    /// Incorporates the newest sample of `view` (all samples since the
    /// start) and returns the updated running interval.
    pub fn update(&mut self, view: &[f64]) -> ConfidenceInterval {
        let n = view.len() as u64;
        if n == 0 {
            return self.running;
        }
        if n == self.count + 1 {
            let x = view[view.len() - 1];
            self.data_min = self.data_min.min(x);
            self.data_max = self.data_max.max(x);
        } else {
            let (lo, hi) = crate::estimators::min_max(view);
            self.data_min = lo;
            self.data_max = hi;
            self.lower_cache = None;
            self.upper_cache = None;
        }
        self.count = n;
        let cfg = &self.config;
        let schedule = &cfg.schedule;
        if !cfg.gate.open(n, schedule) {
            return self.running;
        }
        let j = StitchSchedule::cell_index(n);
        let lambda = schedule.cell_lambda(j);
        let radius = SolverConfig::default_radius(self.data_min, self.data_max, &schedule.ht, cfg.horizon);
        let solver = SolverConfig::new(cfg.tolerance, radius);
        let search = EndpointSearch {
            samples: view,
            lambda,
            epsilon: schedule.ht.epsilon,
            bound: schedule.threshold(n, lambda, schedule.cell_gamma(j)),
            radius,
            tolerance: cfg.tolerance,
            max_iterations: solver.max_iterations,
            data_min: self.data_min,
            data_max: self.data_max,
        };

        let cache = |at: f64, sum: f64, slope: f64| Some(SumCache { at, cell: j, count: n, sum, slope });

        // a finite endpoint is re-solved only once the new sample pushes it
        // out; an infinite one tracks f at the search boundary
        let mut lower = self.running.lower;
        let at = if lower.is_finite() { lower } else { -radius };
        let (s, d) = Self::cached_sum(self.lower_cache, at, j, view, &search);
        if s > search.bound {
            let (m, gm, dm) = search.lower_from(Some((at, s, d)));
            lower = m;
            self.lower_cache = cache(m, gm, dm);
        } else {
            self.lower_cache = cache(at, s, d);
        }

        let mut upper = self.running.upper;
        let at = if upper.is_finite() { upper } else { radius };
        let (s, d) = Self::cached_sum(self.upper_cache, at, j, view, &search);
        if s < -search.bound {
            let (m, gm, dm) = search.upper_from(Some((at, s, d)));
            upper = m;
            self.upper_cache = cache(m, gm, dm);
        } else {
            self.upper_cache = cache(at, s, d);
        }

        self.running = ConfidenceInterval::new(lower, upper);
        self.running
    }
}

/// Stitched boundary constants for the empirical-Bernstein baseline.
const EB_K1: f64 = 1.458_675_914_735_845_3; // (e^(1/4) + e^(-1/4)) / sqrt(2)
const EB_K2: f64 = 1.324_360_635_350_064_2; // (sqrt(e) + 1) / 2

/// Half-width of the empirical-Bernstein interval at count `n` with
/// variance proxy `var` and confidence level `gamma`.
pub fn bernstein_half_width(n: u64, var: f64, gamma: f64) -> f64 {
    let j = StitchSchedule::cell_index(n);
    let d = j as f64 + 1.0;
    let ell = (2.0 * d * d / gamma).ln();
    let nf = n as f64;
    let sd = var.max(0.0).sqrt();
    (EB_K1 * (nf * var.max(0.0) * ell).sqrt() + EB_K2 * sd * ell) / nf
}

/// Empirical-Bernstein interval centered on the sample mean. The variance
/// proxy uses the first `n - 1` samples, regularized by `prior_variance`:
/// `(prior_variance + sum (x - mean)^2) / n`.
pub fn bernstein_interval(samples: &[f64], gamma: f64, prior_variance: f64) -> Result<ConfidenceInterval> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let past = &samples[..n - 1];
    let m2 = if past.is_empty() {
        0.0
    } else {
        let pm = past.iter().sum::<f64>() / past.len() as f64;
        past.iter().map(|x| (x - pm) * (x - pm)).sum::<f64>()
    };
    let var = (prior_variance + m2) / n as f64;
    let h = bernstein_half_width(n as u64, var, gamma);
    Ok(ConfidenceInterval::new(mean - h, mean + h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinCsConfig {
    pub gamma: f64,
    pub prior_variance: f64,
    pub n_min: u64,
}

/// Running intersection of empirical-Bernstein intervals, O(1) per update.
#[derive(Debug, Clone)]
pub struct BernsteinCs {
    pub start_index: u64,
    config: BernsteinCsConfig,
    running: ConfidenceInterval,
    count: u64,
    mean: f64,
    m2: f64,
}

impl BernsteinCs {
    pub fn new(start_index: u64, config: BernsteinCsConfig) -> Self {
        Self { start_index, config, running: ConfidenceInterval::TRIVIAL, count: 0, mean: 0.0, m2: 0.0 }
    }

    pub fn running(&self) -> ConfidenceInterval {
        self.running
    }

    pub fn sample_count(&self) -> u64 {
        self.count
    }

    pub fn update(&mut self, view: &[f64]) -> ConfidenceInterval {
        let Some(&x) = view.last() else {
            return self.running;
        };
        let m2_past = self.m2;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        self.mean += delta / n;
        self.m2 += delta * (x - self.mean);
        if self.count < self.config.n_min.max(1) {
            return self.running;
        }
        let var = (self.config.prior_variance + m2_past) / n;
        let h = bernstein_half_width(self.count, var, self.config.gamma);
        let fresh = ConfidenceInterval::new(self.mean - h, self.mean + h);
        self.running = self.running.intersect(&fresh);
        self.running
    }
}
