//! Piecewise-stationary instances: arms, breakpoints and gap summaries.
//!
//! Rounds are 1-based. A breakpoint `b` ends an epoch: rounds `1..=b` belong
//! to the epoch before it and round `b + 1` starts the next one.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::distributions::{make_shifted_pareto, ArmDistribution};
use crate::error::{Error, Result};
use crate::estimators::HeavyTailParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub k: usize,
    pub horizon: u64,
    pub breakpoints: Vec<u64>,
    pub heavy_tail: HeavyTailParams,
    #[serde(rename = "epoch", with = "epoch_tables")]
    pub arms_per_epoch: Vec<Vec<ArmDistribution>>,
}

mod epoch_tables {
    use super::ArmDistribution;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Epoch {
        arms: Vec<ArmDistribution>,
    }

    pub fn serialize<S: Serializer>(v: &[Vec<ArmDistribution>], s: S) -> Result<S::Ok, S::Error> {
        let e: Vec<Epoch> = v.iter().map(|arms| Epoch { arms: arms.clone() }).collect();
        e.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<ArmDistribution>>, D::Error> {
        Ok(Vec::<Epoch>::deserialize(d)?.into_iter().map(|e| e.arms).collect())
    }
}

/// Noise family used to build instances from mean tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseFamily {
    Gaussian { sigma: f64 },
    Laplace { scale: f64 },
    Pareto { shape: f64 },
}

/// Per-epoch gaps and change magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSummary {
    /// `gaps[j][i] = max_k mu_k^(j) - mu_i^(j)`.
    pub gaps: Vec<Vec<f64>>,
    pub max_gap_per_epoch: Vec<f64>,
    /// `changes[j][i] = |mu_i^(j) - mu_i^(j-1)|`, infinite for the first epoch.
    pub changes: Vec<Vec<f64>>,
    pub delta_min_per_epoch: Vec<f64>,
    /// `min(delta_min^(j-1), delta_min^(j))`.
    pub delta_min_tilde_per_epoch: Vec<f64>,
    /// Smallest change over all breakpoints; infinite without breakpoints.
    pub delta_min: f64,
}

impl InstanceSpec {
    /// Builds and validates an instance.
    pub fn new(
        k: usize,
        horizon: u64,
        breakpoints: Vec<u64>,
        arms_per_epoch: Vec<Vec<ArmDistribution>>,
        heavy_tail: HeavyTailParams,
    ) -> Result<Self> {
        let spec = Self { k, horizon, breakpoints, heavy_tail, arms_per_epoch };
        spec.validate()?;
        Ok(spec)
    }

    /// Instance from a table `means[j][i]` with one noise family for every arm.
    pub fn from_means(
        means: &[Vec<f64>],
        breakpoints: Vec<u64>,
        horizon: u64,
        heavy_tail: HeavyTailParams,
        noise: NoiseFamily,
    ) -> Result<Self> {
        let k = means.first().map_or(0, Vec::len);
        let mut arms = Vec::with_capacity(means.len());
        for row in means {
            let mut epoch = Vec::with_capacity(row.len());
            for &mean in row {
                epoch.push(match noise {
                    NoiseFamily::Gaussian { sigma } => ArmDistribution::Gaussian { mean, sigma },
                    NoiseFamily::Laplace { scale } => ArmDistribution::Laplace { mean, scale },
                    NoiseFamily::Pareto { shape } => make_shifted_pareto(mean, &heavy_tail, shape)?,
                });
            }
            arms.push(epoch);
        }
        Self::new(k, horizon, breakpoints, arms, heavy_tail)
    }

    /// Structural validation; reports every problem at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if let Err(Error::Validation(p)) = self.heavy_tail.validate() {
            problems.extend(p);
        }
        if self.k == 0 {
            problems.push("k must be at least 1".to_string());
        }
        if self.horizon == 0 {
            problems.push("horizon must be at least 1".to_string());
        }
        for (i, &b) in self.breakpoints.iter().enumerate() {
            if b == 0 || b >= self.horizon {
                problems.push(format!("breakpoint {i} = {b} must lie in 1..{}", self.horizon));
            }
            if i > 0 && b <= self.breakpoints[i - 1] {
                problems.push(format!("breakpoints must be strictly increasing (index {i})"));
            }
        }
        if self.arms_per_epoch.len() != self.breakpoints.len() + 1 {
            problems.push(format!(
                "{} breakpoints need {} epochs, found {}",
                self.breakpoints.len(),
                self.breakpoints.len() + 1,
                self.arms_per_epoch.len()
            ));
        }
        for (j, epoch) in self.arms_per_epoch.iter().enumerate() {
            if epoch.len() != self.k {
                problems.push(format!("epoch {j} has {} arms, expected {}", epoch.len(), self.k));
            }
            for (i, d) in epoch.iter().enumerate() {
                if let Err(e) = d.validate() {
                    problems.push(format!("epoch {j} arm {i}: {e}"));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Arms whose centered `(1+eps)`-moment exceeds `v + tol`, as
    /// `(epoch, arm, moment)`; a divergent moment is reported as infinity.
    pub fn moment_violations(&self, tol: f64) -> Vec<(usize, usize, f64)> {
        let q = self.heavy_tail.order();
        let mut out = Vec::new();
        for (j, epoch) in self.arms_per_epoch.iter().enumerate() {
            for (i, d) in epoch.iter().enumerate() {
                let m = d.centered_moment(q).unwrap_or(f64::INFINITY);
                if !(m <= self.heavy_tail.v + tol) {
                    out.push((j, i, m));
                }
            }
        }
        out
    }

    /// Number of breakpoints.
    pub fn upsilon(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn epoch_count(&self) -> usize {
        self.breakpoints.len() + 1
    }

    /// Epoch index of round `t` (1-based).
    pub fn epoch_of(&self, t: u64) -> usize {
        self.breakpoints.partition_point(|&b| b < t)
    }

    /// `(first round, last round)` of epoch `j`, inclusive.
    pub fn epoch_rounds(&self, j: usize) -> (u64, u64) {
        let start = if j == 0 { 1 } else { self.breakpoints[j - 1] + 1 };
        let end = self.breakpoints.get(j).copied().unwrap_or(self.horizon);
        (start, end)
    }

    pub fn epoch_len(&self, j: usize) -> u64 {
        let (s, e) = self.epoch_rounds(j);
        e + 1 - s
    }

    pub fn means(&self) -> Vec<Vec<f64>> {
        self.arms_per_epoch.iter().map(|e| e.iter().map(ArmDistribution::mean).collect()).collect()
    }

    pub fn mean(&self, arm: usize, t: u64) -> f64 {
        self.arms_per_epoch[self.epoch_of(t)][arm].mean()
    }

    pub fn sample<R: Rng + ?Sized>(&self, arm: usize, t: u64, rng: &mut R) -> f64 {
        self.arms_per_epoch[self.epoch_of(t)][arm].sample(rng)
    }

    pub fn gaps(&self) -> GapSummary {
        let means = self.means();
        let mut gaps = Vec::new();
        let mut max_gap_per_epoch = Vec::new();
        for row in &means {
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let g: Vec<f64> = row.iter().map(|m| best - m).collect();
            max_gap_per_epoch.push(g.iter().copied().fold(0.0, f64::max));
            gaps.push(g);
        }
        let mut changes = Vec::new();
        for (j, row) in means.iter().enumerate() {
            if j == 0 {
                changes.push(vec![f64::INFINITY; row.len()]);
            } else {
                changes.push(row.iter().zip(&means[j - 1]).map(|(a, b)| (a - b).abs()).collect());
            }
        }
        let delta_min_per_epoch: Vec<f64> =
            changes.iter().map(|c| c.iter().copied().fold(f64::INFINITY, f64::min)).collect();
        let delta_min_tilde_per_epoch = (0..delta_min_per_epoch.len())
            .map(|j| {
                let prev = if j == 0 { f64::INFINITY } else { delta_min_per_epoch[j - 1] };
                prev.min(delta_min_per_epoch[j])
            })
            .collect();
        let delta_min = delta_min_per_epoch.iter().skip(1).copied().fold(f64::INFINITY, f64::min);
        GapSummary { gaps, max_gap_per_epoch, changes, delta_min_per_epoch, delta_min_tilde_per_epoch, delta_min }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    /// SHA-256 over the canonical TOML text, framed like a git blob.
    pub fn content_hash(&self) -> Result<String> {
        let body = self.to_toml_string()?;
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", body.len()).as_bytes());
        h.update(body.as_bytes());
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(means: &[Vec<f64>], bps: Vec<u64>, t: u64) -> InstanceSpec {
        let ht = HeavyTailParams::new(1.0, 1.0).unwrap();
        InstanceSpec::from_means(means, bps, t, ht, NoiseFamily::Gaussian { sigma: 1.0 }).unwrap()
    }

    #[test]
    fn epoch_lookup() {
        let s = gaussian(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]], vec![10, 20], 30);
        assert_eq!(s.epoch_of(1), 0);
        assert_eq!(s.epoch_of(10), 0);
        assert_eq!(s.epoch_of(11), 1);
        assert_eq!(s.epoch_of(20), 1);
        assert_eq!(s.epoch_of(21), 2);
        assert_eq!(s.epoch_of(30), 2);
        assert_eq!(s.epoch_rounds(1), (11, 20));
        assert_eq!((0..3).map(|j| s.epoch_len(j)).sum::<u64>(), 30);
    }

    #[test]
    fn gap_summary() {
        let s = gaussian(&[vec![0.0, 1.0], vec![1.5, 0.5], vec![1.5, 0.25]], vec![10, 20], 30);
        let g = s.gaps();
        assert_eq!(g.gaps[0], vec![1.0, 0.0]);
        assert_eq!(g.max_gap_per_epoch, vec![1.0, 1.0, 1.25]);
        assert_eq!(g.delta_min_per_epoch[1], 0.5);
        assert_eq!(g.delta_min_per_epoch[2], 0.0);
        assert_eq!(g.delta_min_tilde_per_epoch, vec![f64::INFINITY, 0.5, 0.0]);
        assert_eq!(g.delta_min, 0.0);
    }

    #[test]
    fn validation_lists_every_problem() {
        let ht = HeavyTailParams { epsilon: 1.0, v: 1.0 };
        let arm = ArmDistribution::Gaussian { mean: 0.0, sigma: 1.0 };
        let bad = InstanceSpec {
            k: 2,
            horizon: 10,
            breakpoints: vec![5, 3, 12],
            heavy_tail: ht,
            arms_per_epoch: vec![vec![arm]],
        };
        let Err(Error::Validation(p)) = bad.validate() else { panic!("expected validation error") };
        assert!(p.len() >= 4, "{p:?}");
    }

    #[test]
    fn toml_roundtrip_and_hash() {
        let ht = HeavyTailParams::new(0.45, 3.0).unwrap();
        let s = InstanceSpec::from_means(
            &[vec![1.2, 1.0, 0.5], vec![0.1, 2.4, 0.5]],
            vec![214],
            428,
            ht,
            NoiseFamily::Pareto { shape: 1.5 },
        )
        .unwrap();
        let text = s.to_toml_string().unwrap();
        let back = InstanceSpec::from_toml_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.content_hash().unwrap(), s.content_hash().unwrap());
        assert_eq!(s.content_hash().unwrap().len(), 64);
        assert!(s.moment_violations(1e-6).is_empty());
    }
}
