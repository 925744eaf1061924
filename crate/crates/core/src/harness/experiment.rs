//! Monte-Carlo trials of policies on an instance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ledger::RegretLedger;
use crate::environments::InstanceSpec;
use crate::error::Result;
use crate::policies::{Policy, PolicyConfig};

/// Plays one trial. Rewards come from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn run_trial(spec: &InstanceSpec, policy: &mut dyn Policy, seed: u64) -> Result<RegretLedger> {
    let gaps = spec.gaps().gaps;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ledger = RegretLedger::new(seed, spec.epoch_count(), spec.k, spec.horizon);
    for t in 1..=spec.horizon {
        let j = spec.epoch_of(t);
        let arm = policy.choose(t);
        let reward = spec.arms_per_epoch[j][arm].sample(&mut rng);
        ledger.record(j, arm, gaps[j][arm]);
        if policy.observe(t, arm, reward)? {
            ledger.detection_rounds.push(t);
        }
    }
    Ok(ledger)
}

/// Aggregate over trials for one policy.
#[derive(Debug, Clone)]
pub struct PolicySummary {
    pub label: String,
    pub mean_cumulative: Vec<f64>,
    pub std_cumulative: Vec<f64>,
    pub ledgers: Vec<RegretLedger>,
    pub identity_ok: bool,
}

impl PolicySummary {
    pub fn final_regrets(&self) -> Vec<f64> {
        self.ledgers.iter().map(RegretLedger::total).collect()
    }

    pub fn mean_final(&self) -> f64 {
        self.mean_cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn std_final(&self) -> f64 {
        self.std_cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn mean_detections(&self) -> f64 {
        if self.ledgers.is_empty() {
            return 0.0;
        }
        self.ledgers.iter().map(|l| l.detection_rounds.len() as f64).sum::<f64>() / self.ledgers.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub policies: Vec<PolicySummary>,
}

/// Runs `n_trials` trials of every policy. Trial `i` uses seed
/// `seed_base + i` for every policy, so policies see common random numbers.
pub fn run_experiment(
    spec: &InstanceSpec,
    policies: &[PolicyConfig],
    n_trials: usize,
    seed_base: u64,
) -> Result<ExperimentResults> {
    spec.validate()?;
    for p in policies {
        p.validate()?;
    }
    let seeds: Vec<u64> = (0..n_trials as u64).map(|i| seed_base.wrapping_add(i)).collect();
    let gaps = spec.gaps().gaps;
    let labels = unique_labels(policies);
    let mut out = Vec::with_capacity(policies.len());
    for (cfg, label) in policies.iter().zip(labels) {
        let ledgers: Vec<RegretLedger> = seeds
            .par_iter()
            .map(|&seed| {
                let mut policy = cfg.build(spec, seed)?;
                run_trial(spec, policy.as_mut(), seed)
            })
            .collect::<Result<_>>()?;
        let identity_ok = ledgers.iter().all(|l| l.identity_holds(&gaps));
        let (mean, std) = mean_std(&ledgers.iter().map(RegretLedger::cumulative).collect::<Vec<_>>(), spec.horizon);
        out.push(PolicySummary { label, mean_cumulative: mean, std_cumulative: std, ledgers, identity_ok });
    }
    Ok(ExperimentResults { horizon: spec.horizon, seeds, policies: out })
}

fn unique_labels(policies: &[PolicyConfig]) -> Vec<String> {
    let base: Vec<String> = policies.iter().map(PolicyConfig::label).collect();
    base.iter()
        .enumerate()
        .map(|(i, l)| {
            if base.iter().filter(|b| *b == l).count() > 1 {
                format!("{l}_{}", base[..i].iter().filter(|b| *b == l).count() + 1)
            } else {
                l.clone()
            }
        })
        .collect()
}

/// Per-round mean and sample standard deviation across trajectories.
pub fn mean_std(trajectories: &[Vec<f64>], horizon: u64) -> (Vec<f64>, Vec<f64>) {
    let n = trajectories.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let len = horizon as usize;
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    for t in 0..len {
        let m = trajectories.iter().map(|tr| tr[t]).sum::<f64>() / n as f64;
        mean[t] = m;
        if n > 1 {
            let ss: f64 = trajectories.iter().map(|tr| (tr[t] - m) * (tr[t] - m)).sum();
            std[t] = (ss / (n - 1) as f64).sqrt();
        }
    }
    (mean, std)
}
