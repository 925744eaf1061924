//! Detection-delay experiments on single-change streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{DetectorConfig, DetectorState};
use crate::environments::ArmDistribution;
use crate::error::Result;

/// Outcome of one stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum StreamOutcome {
    /// Alarm at or before the change point.
    FalseAlarm { at: u64 },
    Detected { delay: u64 },
    /// No alarm by the horizon; the delay is recorded as `T - t_c`.
    Censored { delay: u64 },
}

impl StreamOutcome {
    pub fn delay(&self) -> Option<u64> {
        match *self {
            Self::FalseAlarm { .. } => None,
            Self::Detected { delay } | Self::Censored { delay } => Some(delay),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub label: String,
    pub outcomes: Vec<StreamOutcome>,
}

impl DelayReport {
    pub fn false_alarms(&self) -> usize {
        self.outcomes.iter().filter(|o| matches!(o, StreamOutcome::FalseAlarm { .. })).count()
    }

    pub fn censored(&self) -> usize {
        self.outcomes.iter().filter(|o| matches!(o, StreamOutcome::Censored { .. })).count()
    }

    /// Delays of the streams without false alarm, censored ones included.
    pub fn delays(&self) -> Vec<u64> {
        self.outcomes.iter().filter_map(StreamOutcome::delay).collect()
    }

    pub fn mean_delay(&self) -> Option<f64> {
        let d = self.delays();
        (!d.is_empty()).then(|| d.iter().sum::<u64>() as f64 / d.len() as f64)
    }

    /// Lower median of the delays.
    pub fn median_delay(&self) -> Option<u64> {
        let mut d = self.delays();
        if d.is_empty() {
            return None;
        }
        d.sort_unstable();
        Some(d[(d.len() - 1) / 2])
    }
}

/// Feeds `pre` samples for rounds `1..=change_point` and `post` samples
/// afterwards, starting a sequence at every sample. Stream `i` uses seed
/// `seed_base + i`.
pub fn detection_delay_experiment(
    label: &str,
    pre: ArmDistribution,
    post: ArmDistribution,
    change_point: u64,
    horizon: u64,
    detector: DetectorConfig,
    n_trials: usize,
    seed_base: u64,
) -> Result<DelayReport> {
    let outcomes = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_base.wrapping_add(i));
            let mut det = DetectorState::new(detector);
            for t in 1..=horizon {
                let x = if t <= change_point { pre.sample(&mut rng) } else { post.sample(&mut rng) };
                if let Some(at) = det.step(x, true)? {
                    return Ok(if at <= change_point {
                        StreamOutcome::FalseAlarm { at }
                    } else {
                        StreamOutcome::Detected { delay: at - change_point }
                    });
                }
            }
            Ok(StreamOutcome::Censored { delay: horizon.saturating_sub(change_point) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DelayReport { label: label.to_string(), outcomes })
}

/// First restart after `change_point` in each ledger's detection rounds,
/// censored at the horizon.
pub fn bandit_delays(detection_rounds: &[Vec<u64>], change_point: u64, horizon: u64) -> Vec<StreamOutcome> {
    detection_rounds
        .iter()
        .map(|rounds| match rounds.iter().find(|&&r| r > change_point) {
            Some(&r) => StreamOutcome::Detected { delay: r - change_point },
            None => StreamOutcome::Censored { delay: horizon.saturating_sub(change_point) },
        })
        .collect()
}
