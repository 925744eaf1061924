//! Sliding-window UCB.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{argmax, Policy};
use crate::error::Result;
use crate::estimators::HeavyTailParams;

/// Index `window mean + B sqrt(xi ln(min(t, W)) / N_W)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlidingWindowUcbConfig {
    /// Window length; by default `ceil(sqrt(T ln T))`.
    #[serde(default)]
    pub window: Option<u64>,
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// Bonus scale `B`; by default `v^(1/(1+e))`.
    #[serde(default)]
    pub scale: Option<f64>,
}

fn default_xi() -> f64 {
    0.6
}

impl Default for SlidingWindowUcbConfig {
    fn default() -> Self {
        Self { window: None, xi: default_xi(), scale: None }
    }
}

pub fn default_window(horizon: u64) -> u64 {
    let t = horizon.max(2) as f64;
    (t * t.ln()).sqrt().ceil() as u64
}

pub struct SlidingWindowUcb {
    window: u64,
    xi: f64,
    scale: f64,
    recent: VecDeque<(usize, f64)>,
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl SlidingWindowUcb {
    pub fn new(k: usize, horizon: u64, ht: HeavyTailParams, cfg: SlidingWindowUcbConfig) -> Self {
        Self {
            window: cfg.window.unwrap_or_else(|| default_window(horizon)).max(1),
            xi: cfg.xi,
            scale: cfg.scale.unwrap_or_else(|| ht.scale()),
            recent: VecDeque::new(),
            counts: vec![0; k],
            sums: vec![0.0; k],
        }
    }

    pub fn window(&self) -> u64 {
        self.window
    }
}

impl Policy for SlidingWindowUcb {
    fn name(&self) -> String {
        "sw_ucb".into()
    }

    fn choose(&mut self, round: u64) -> usize {
        if let Some(i) = self.counts.iter().position(|&c| c == 0) {
            return i;
        }
        let log_term = (round.min(self.window) as f64).ln();
        argmax(self.counts.iter().zip(&self.sums).map(|(&n, &s)| {
            let n = n as f64;
            s / n + self.scale * (self.xi * log_term / n).sqrt()
        }))
    }

    fn observe(&mut self, _round: u64, arm: usize, reward: f64) -> Result<bool> {
        self.recent.push_back((arm, reward));
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        if self.recent.len() as u64 > self.window {
            let (a, r) = self.recent.pop_front().expect("nonempty window");
            self.counts[a] -= 1;
            self.sums[a] -= r;
            if self.counts[a] == 0 {
                self.sums[a] = 0.0;
            }
        }
        Ok(false)
    }
}
