//! Reference policies: uniform random play and the mean oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{argmax, Policy};
use crate::environments::InstanceSpec;
use crate::error::Result;

pub struct UniformPolicy {
    k: usize,
    rng: ChaCha8Rng,
}

impl UniformPolicy {
    pub fn new(k: usize, seed: u64) -> Self {
        Self { k, rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_a11_a7b5) }
    }
}

impl Policy for UniformPolicy {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn choose(&mut self, _round: u64) -> usize {
        self.rng.random_range(0..self.k)
    }

    fn observe(&mut self, _round: u64, _arm: usize, _reward: f64) -> Result<bool> {
        Ok(false)
    }
}

/// Plays an arm with the largest true mean in every round.
pub struct OraclePolicy {
    spec: InstanceSpec,
}

impl OraclePolicy {
    pub fn new(spec: InstanceSpec) -> Self {
        Self { spec }
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn choose(&mut self, round: u64) -> usize {
        let j = self.spec.epoch_of(round);
        argmax(self.spec.arms_per_epoch[j].iter().map(|d| d.mean()))
    }

    fn observe(&mut self, _round: u64, _arm: usize, _reward: f64) -> Result<bool> {
        Ok(false)
    }
}
