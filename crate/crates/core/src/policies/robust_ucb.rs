//! Robust UCB with median-of-means index.

use serde::{Deserialize, Serialize};

use super::{argmax, Policy};
use crate::error::Result;
use crate::estimators::{median_of_means, mom_block_count, HeavyTailParams};

/// Index `MoM + (c_v v)^(1/(1+e)) (c_l ln(t^2) / n)^(e/(1+e))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustUcbConfig {
    #[serde(default = "default_variance_factor")]
    pub variance_factor: f64,
    #[serde(default = "default_log_factor")]
    pub log_factor: f64,
    /// Fixed block count; by default `min(n, ceil(8 ln(T^2)) + 1)`.
    #[serde(default)]
    pub block_count: Option<usize>,
}

fn default_variance_factor() -> f64 {
    12.0
}

fn default_log_factor() -> f64 {
    16.0
}

impl Default for RobustUcbConfig {
    fn default() -> Self {
        Self { variance_factor: default_variance_factor(), log_factor: default_log_factor(), block_count: None }
    }
}

/// Index of one arm with `samples` at clock `t`.
pub fn robust_ucb_index(
    samples: &[f64],
    t: u64,
    horizon: u64,
    ht: &HeavyTailParams,
    cfg: &RobustUcbConfig,
) -> f64 {
    let n = samples.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let blocks = cfg.block_count.map_or_else(|| mom_block_count(n, horizon), |b| b.clamp(1, n));
    let center = median_of_means(samples, blocks).expect("nonempty samples, valid block count");
    let q = ht.order();
    let tf = t.max(1) as f64;
    let bonus = (cfg.variance_factor * ht.v).powf(1.0 / q)
        * (cfg.log_factor * (tf * tf).ln() / n as f64).powf(ht.epsilon / q);
    center + bonus
}

/// Robust UCB over its own history; the clock is the number of rewards seen
/// plus one.
#[derive(Debug, Clone)]
pub struct RobustUcb {
    horizon: u64,
    ht: HeavyTailParams,
    cfg: RobustUcbConfig,
    history: Vec<Vec<f64>>,
    clock: u64,
}

impl RobustUcb {
    pub fn new(k: usize, horizon: u64, ht: HeavyTailParams, cfg: RobustUcbConfig) -> Self {
        Self { horizon, ht, cfg, history: vec![Vec::new(); k], clock: 0 }
    }

    pub fn reset(&mut self) {
        for h in &mut self.history {
            h.clear();
        }
        self.clock = 0;
    }

    pub fn history(&self) -> &[Vec<f64>] {
        &self.history
    }

    pub fn push(&mut self, arm: usize, reward: f64) {
        self.history[arm].push(reward);
        self.clock += 1;
    }

    /// Unplayed arms first (lowest index), then the largest index.
    pub fn select(&self) -> usize {
        if let Some(i) = self.history.iter().position(Vec::is_empty) {
            return i;
        }
        let t = self.clock + 1;
        argmax(self.history.iter().map(|h| robust_ucb_index(h, t, self.horizon, &self.ht, &self.cfg)))
    }
}

impl Policy for RobustUcb {
    fn name(&self) -> String {
        "robust_ucb".into()
    }

    fn choose(&mut self, _round: u64) -> usize {
        self.select()
    }

    fn observe(&mut self, _round: u64, arm: usize, reward: f64) -> Result<bool> {
        self.push(arm, reward);
        Ok(false)
    }
}
