//! Robust-CPD-UCB: Robust UCB restarted whenever a per-arm stack of Catoni
//! confidence sequences stops sharing a point, with forced uniform
//! exploration at rate `eta`.

use serde::{Deserialize, Serialize};

use super::robust_ucb::{RobustUcb, RobustUcbConfig};
use super::Policy;
use crate::confseq::{CatoniCsConfig, CsGate, StitchSchedule};
use crate::detection::{n_min_default, CsKind, DetectorConfig, DetectorState};
use crate::error::{Error, Result};
use crate::estimators::{HeavyTailParams, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgoConfig {
    #[serde(default = "default_eta0")]
    pub eta0: f64,
    /// Grow `eta` with the number of detections; mutually exclusive with `fixed_eta`.
    #[serde(default = "default_true")]
    pub adaptive_eta: bool,
    #[serde(default)]
    pub fixed_eta: Option<f64>,
    /// Confidence level of the sequences; by default `2 / T^3`.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Pull count before sequences start and own-sample gate. Without it the
    /// gate is `ceil(68 (1+e)/e ln T)` plus the feasibility condition.
    #[serde(default)]
    pub n_min: Option<u64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Ratio of the geometric start grid; `None` starts a sequence at every sample.
    #[serde(default)]
    pub thinning: Option<f64>,
    #[serde(default)]
    pub sub_policy: RobustUcbConfig,
}

fn default_eta0() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_tolerance() -> f64 {
    SolverConfig::DEFAULT_TOLERANCE
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            eta0: default_eta0(),
            adaptive_eta: true,
            fixed_eta: None,
            gamma: None,
            n_min: None,
            tolerance: default_tolerance(),
            thinning: None,
            sub_policy: RobustUcbConfig::default(),
        }
    }
}

impl AlgoConfig {
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        if self.adaptive_eta == self.fixed_eta.is_some() {
            p.push("exactly one of adaptive_eta and fixed_eta must be active".to_string());
        }
        if !(self.eta0 > 0.0) {
            p.push(format!("eta0 must be positive, got {}", self.eta0));
        }
        if let Some(e) = self.fixed_eta {
            if !(e > 0.0) {
                p.push(format!("fixed_eta must be positive, got {e}"));
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                p.push(format!("gamma must lie in (0, 1), got {g}"));
            }
        }
        if self.n_min == Some(0) {
            p.push("n_min must be at least 1".to_string());
        }
        if !(self.tolerance > 0.0) {
            p.push(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if let Some(r) = self.thinning {
            if !(r > 1.0) {
                p.push(format!("thinning ratio must exceed 1, got {r}"));
            }
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(p))
        }
    }
}

/// Exploration rate after `detections` restarts:
/// `eta0 sqrt((detections + 1) K ln T / T)`, capped at `K`.
pub fn eta_at(detections: u64, k: usize, horizon: u64, eta0: f64) -> f64 {
    let t = horizon.max(2) as f64;
    let eta = eta0 * ((detections + 1) as f64 * k as f64 * t.ln() / t).sqrt();
    eta.min(k as f64)
}

/// Forced arm (0-based) at local round `t_prime`, if any.
///
/// With `r = t_prime mod floor(K/eta)`, arm `r` (1-based) is forced for
/// `r in 1..=K`; when `floor(K/eta) <= K` every round is forced and `r = 0`
/// maps to arm `K`.
pub fn forced_arm(t_prime: u64, k: usize, eta: f64) -> Option<usize> {
    let period = ((k as f64 / eta).floor() as u64).max(1);
    let r = t_prime % period;
    if r >= 1 && r <= k as u64 {
        Some(r as usize - 1)
    } else if period <= k as u64 {
        Some(k - 1)
    } else {
        None
    }
}

pub struct RobustCpdUcb {
    k: usize,
    horizon: u64,
    cfg: AlgoConfig,
    n_min: u64,
    sub: RobustUcb,
    detectors: Vec<DetectorState>,
    counts: Vec<u64>,
    t_prime: u64,
    eta: f64,
    detections: u64,
    detection_rounds: Vec<u64>,
}

impl RobustCpdUcb {
    pub fn new(k: usize, horizon: u64, ht: HeavyTailParams, cfg: AlgoConfig) -> Result<Self> {
        cfg.validate()?;
        let t = horizon.max(2) as f64;
        let gamma = cfg.gamma.unwrap_or(2.0 / (t * t * t));
        let schedule = StitchSchedule::new(gamma, ht)?;
        let (n_min, gate) = match cfg.n_min {
            Some(n) => (n, CsGate { n_min: n, feasibility_theta: None }),
            None => {
                let n = n_min_default(horizon, ht.epsilon);
                (n, CsGate { n_min: n, feasibility_theta: Some(gamma / 4.0) })
            }
        };
        let det_cfg = DetectorConfig {
            kind: CsKind::Catoni(CatoniCsConfig { schedule, horizon, tolerance: cfg.tolerance, gate }),
            thinning: cfg.thinning,
        };
        let eta = match cfg.fixed_eta {
            Some(e) => e.min(k as f64),
            None => eta_at(0, k, horizon, cfg.eta0),
        };
        Ok(Self {
            k,
            horizon,
            sub: RobustUcb::new(k, horizon, ht, cfg.sub_policy.clone()),
            cfg,
            n_min,
            detectors: (0..k).map(|_| DetectorState::new(det_cfg)).collect(),
            counts: vec![0; k],
            t_prime: 0,
            eta,
            detections: 0,
            detection_rounds: Vec::new(),
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn n_min(&self) -> u64 {
        self.n_min
    }

    pub fn detection_rounds(&self) -> &[u64] {
        &self.detection_rounds
    }

    fn restart(&mut self) {
        self.t_prime = 0;
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.detectors.iter_mut().for_each(DetectorState::reset);
        self.sub.reset();
        self.detections += 1;
        if self.cfg.fixed_eta.is_none() {
            self.eta = eta_at(self.detections, self.k, self.horizon, self.cfg.eta0);
        }
    }
}

impl Policy for RobustCpdUcb {
    fn name(&self) -> String {
        "robust_cpd_ucb".into()
    }

    fn choose(&mut self, _round: u64) -> usize {
        forced_arm(self.t_prime, self.k, self.eta).unwrap_or_else(|| self.sub.select())
    }

    fn observe(&mut self, round: u64, arm: usize, reward: f64) -> Result<bool> {
        self.t_prime += 1;
        self.counts[arm] += 1;
        self.sub.push(arm, reward);
        if self.counts[arm] >= self.n_min && self.detectors[arm].step(reward, true)?.is_some() {
            self.detection_rounds.push(round);
            self.restart();
            return Ok(true);
        }
        Ok(false)
    }

    fn detections(&self) -> u64 {
        self.detections
    }
}
