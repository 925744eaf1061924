//! Bandit policies.
//!
//! Every policy is driven by [`Policy::choose`] followed by
//! [`Policy::observe`] once per round. Rounds are 1-based.

mod monitored_ucb;
mod rcpd_ucb;
mod robust_ucb;
mod simple;
mod sw_ucb;

use serde::{Deserialize, Serialize};

pub use monitored_ucb::{MonitoredUcb, MonitoredUcbConfig};
pub use rcpd_ucb::{eta_at, forced_arm, AlgoConfig, RobustCpdUcb};
pub use robust_ucb::{robust_ucb_index, RobustUcb, RobustUcbConfig};
pub use simple::{OraclePolicy, UniformPolicy};
pub use sw_ucb::{SlidingWindowUcb, SlidingWindowUcbConfig};

use crate::environments::InstanceSpec;
use crate::error::Result;

pub trait Policy: Send {
    fn name(&self) -> String;

    /// Arm (0-based) to play in `round`.
    fn choose(&mut self, round: u64) -> usize;

    /// Feeds the reward of the arm played in `round`. Returns true when the
    /// policy detected a change and restarted.
    fn observe(&mut self, round: u64, arm: usize, reward: f64) -> Result<bool>;

    /// Number of restarts so far.
    fn detections(&self) -> u64 {
        0
    }
}

/// Serializable policy description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PolicyConfig {
    RobustCpdUcb(AlgoConfig),
    RobustUcb(RobustUcbConfig),
    SlidingWindowUcb(SlidingWindowUcbConfig),
    MonitoredUcb(MonitoredUcbConfig),
    Uniform,
    Oracle,
}

impl PolicyConfig {
    pub fn label(&self) -> String {
        match self {
            Self::RobustCpdUcb(_) => "robust_cpd_ucb",
            Self::RobustUcb(_) => "robust_ucb",
            Self::SlidingWindowUcb(_) => "sw_ucb",
            Self::MonitoredUcb(_) => "m_ucb",
            Self::Uniform => "uniform",
            Self::Oracle => "oracle",
        }
        .to_string()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::RobustCpdUcb(c) => c.validate(),
            Self::MonitoredUcb(c) => c.validate(),
            _ => Ok(()),
        }
    }

    /// Fresh policy for one trial on `spec`.
    pub fn build(&self, spec: &InstanceSpec, seed: u64) -> Result<Box<dyn Policy>> {
        let (k, t, ht) = (spec.k, spec.horizon, spec.heavy_tail);
        Ok(match self {
            Self::RobustCpdUcb(c) => Box::new(RobustCpdUcb::new(k, t, ht, c.clone())?),
            Self::RobustUcb(c) => Box::new(RobustUcb::new(k, t, ht, c.clone())),
            Self::SlidingWindowUcb(c) => Box::new(SlidingWindowUcb::new(k, t, ht, c.clone())),
            Self::MonitoredUcb(c) => Box::new(MonitoredUcb::new(k, t, ht, c.clone())?),
            Self::Uniform => Box::new(UniformPolicy::new(k, seed)),
            Self::Oracle => Box::new(OraclePolicy::new(spec.clone())),
        })
    }
}

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}
