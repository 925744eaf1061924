//! Monitored UCB: UCB1 with forced uniform exploration and a two-window
//! mean-shift test on the played arm.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{argmax, Policy};
use crate::error::{Error, Result};
use crate::estimators::HeavyTailParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitoredUcbConfig {
    /// Even test window `w`.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Threshold on `|sum of last w/2 - sum of previous w/2|`; by default
    /// `2 v^(1/(1+e)) sqrt((w/2) ln(2 K T^2))`.
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Forced exploration rate; by default `sqrt(K ln T / T)`.
    #[serde(default)]
    pub exploration: Option<f64>,
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// Bonus scale; by default `v^(1/(1+e))`.
    #[serde(default)]
    pub scale: Option<f64>,
}

fn default_window() -> usize {
    100
}

fn default_xi() -> f64 {
    2.0
}

impl Default for MonitoredUcbConfig {
    fn default() -> Self {
        Self { window: default_window(), threshold: None, exploration: None, xi: default_xi(), scale: None }
    }
}

impl MonitoredUcbConfig {
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        if self.window < 2 || self.window % 2 != 0 {
            p.push(format!("m_ucb window must be even and >= 2, got {}", self.window));
        }
        if let Some(g) = self.exploration {
            if !(g > 0.0 && g <= 1.0) {
                p.push(format!("m_ucb exploration must lie in (0, 1], got {g}"));
            }
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(p))
        }
    }
}

pub struct MonitoredUcb {
    k: usize,
    window: usize,
    threshold: f64,
    period: u64,
    xi: f64,
    scale: f64,
    since_reset: u64,
    counts: Vec<u64>,
    sums: Vec<f64>,
    recent: Vec<VecDeque<f64>>,
    resets: u64,
}

impl MonitoredUcb {
    pub fn new(k: usize, horizon: u64, ht: HeavyTailParams, cfg: MonitoredUcbConfig) -> Result<Self> {
        cfg.validate()?;
        let t = horizon.max(2) as f64;
        let half = (cfg.window / 2) as f64;
        let threshold =
            cfg.threshold.unwrap_or_else(|| 2.0 * ht.scale() * (half * (2.0 * k as f64 * t * t).ln()).sqrt());
        let gamma = cfg.exploration.unwrap_or_else(|| (k as f64 * t.ln() / t).sqrt()).min(1.0);
        let period = ((k as f64 / gamma).floor() as u64).max(k as u64);
        Ok(Self {
            k,
            window: cfg.window,
            threshold,
            period,
            xi: cfg.xi,
            scale: cfg.scale.unwrap_or_else(|| ht.scale()),
            since_reset: 0,
            counts: vec![0; k],
            sums: vec![0.0; k],
            recent: vec![VecDeque::with_capacity(cfg.window); k],
            resets: 0,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn reset(&mut self) {
        self.since_reset = 0;
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.recent.iter_mut().for_each(VecDeque::clear);
    }

    fn shift_detected(&self, arm: usize) -> bool {
        let buf = &self.recent[arm];
        if buf.len() < self.window {
            return false;
        }
        let half = self.window / 2;
        let first: f64 = buf.iter().take(half).sum();
        let second: f64 = buf.iter().skip(half).sum();
        (second - first).abs() > self.threshold
    }
}

impl Policy for MonitoredUcb {
    fn name(&self) -> String {
        "m_ucb".into()
    }

    fn choose(&mut self, _round: u64) -> usize {
        let a = (self.since_reset % self.period) as usize;
        if a < self.k {
            return a;
        }
        if let Some(i) = self.counts.iter().position(|&c| c == 0) {
            return i;
        }
        let log_term = (self.since_reset.max(1) as f64).ln();
        argmax(self.counts.iter().zip(&self.sums).map(|(&n, &s)| {
            let n = n as f64;
            s / n + self.scale * (self.xi * log_term / n).sqrt()
        }))
    }

    fn observe(&mut self, _round: u64, arm: usize, reward: f64) -> Result<bool> {
        self.since_reset += 1;
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        let buf = &mut self.recent[arm];
        buf.push_back(reward);
        if buf.len() > self.window {
            buf.pop_front();
        }
        if self.shift_detected(arm) {
            self.reset();
            self.resets += 1;
            return Ok(true);
        }
        Ok(false)
    }

    fn detections(&self) -> u64 {
        self.resets
    }
}
