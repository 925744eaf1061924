//! Experiment configuration documents and command-line overrides.
//!
//! Overrides are `key=value` pairs. A bare key sets a top-level field when
//! one exists, otherwise the field in every policy that accepts it. A key
//! prefixed by a policy type (`robust_cpd_ucb.n_min=50`) targets only that
//! type; further dots descend into nested tables.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::confseq::{BernsteinCsConfig, CatoniCsConfig, CsGate, StitchSchedule};
use crate::detection::{n_min_default, CsKind, DetectorConfig};
use crate::environments::ArmDistribution;
use crate::error::{Error, Result};
use crate::estimators::{HeavyTailParams, SolverConfig};
use crate::policies::PolicyConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Instance file, relative to the config file.
    pub instance: PathBuf,
    pub n_trials: usize,
    pub seed_base: u64,
    #[serde(rename = "policy")]
    pub policies: Vec<PolicyConfig>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        if self.n_trials == 0 {
            p.push("n_trials must be at least 1".to_string());
        }
        if self.policies.is_empty() {
            p.push("at least one [[policy]] is required".to_string());
        }
        for (i, pol) in self.policies.iter().enumerate() {
            if let Err(Error::Validation(v)) = pol.validate() {
                p.extend(v.into_iter().map(|m| format!("policy {i}: {m}")));
            }
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(p))
        }
    }

    /// Parses, applies overrides and validates. Returns the config and the
    /// resolved document.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<(Self, toml::Table)> {
        let (cfg, doc): (Self, _) = load_with_overrides(path, overrides, &["policy"])?;
        cfg.validate()?;
        Ok((cfg, doc))
    }

    pub fn instance_path(&self, config_path: &Path) -> PathBuf {
        config_path.parent().unwrap_or(Path::new(".")).join(&self.instance)
    }
}

/// Detector stacked by a delay experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DetectorSpec {
    Catoni {
        /// Default `2 / T^3`.
        #[serde(default)]
        gamma: Option<f64>,
        /// Own-sample gate; default is the guaranteed count plus feasibility.
        #[serde(default)]
        n_min: Option<u64>,
        #[serde(default)]
        thinning: Option<f64>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    Bernstein {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default)]
        n_min: Option<u64>,
        /// Default `v^(2/(1+e))`.
        #[serde(default)]
        prior_variance: Option<f64>,
        #[serde(default)]
        thinning: Option<f64>,
    },
}

impl DetectorSpec {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Catoni { .. } => "catoni",
            Self::Bernstein { .. } => "bernstein",
        }
    }

    pub fn build(&self, ht: HeavyTailParams, horizon: u64) -> Result<DetectorConfig> {
        let t = horizon.max(2) as f64;
        let default_gamma = 2.0 / (t * t * t);
        Ok(match *self {
            Self::Catoni { gamma, n_min, thinning, tolerance } => {
                let gamma = gamma.unwrap_or(default_gamma);
                let gate = match n_min {
                    Some(n) => CsGate { n_min: n, feasibility_theta: None },
                    None => CsGate { n_min: n_min_default(horizon, ht.epsilon), feasibility_theta: Some(gamma / 4.0) },
                };
                DetectorConfig {
                    kind: CsKind::Catoni(CatoniCsConfig {
                        schedule: StitchSchedule::new(gamma, ht)?,
                        horizon,
                        tolerance: tolerance.unwrap_or(SolverConfig::DEFAULT_TOLERANCE),
                        gate,
                    }),
                    thinning,
                }
            }
            Self::Bernstein { gamma, n_min, prior_variance, thinning } => DetectorConfig {
                kind: CsKind::Bernstein(BernsteinCsConfig {
                    gamma: gamma.unwrap_or(default_gamma),
                    prior_variance: prior_variance.unwrap_or(ht.scale() * ht.scale()),
                    n_min: n_min.unwrap_or(1),
                }),
                thinning,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectConfig {
    pub name: String,
    pub horizon: u64,
    /// Last pre-change round; equal to `horizon` for a stationary stream.
    pub change_point: u64,
    pub n_trials: usize,
    pub seed_base: u64,
    pub heavy_tail: HeavyTailParams,
    pub pre: ArmDistribution,
    pub post: ArmDistribution,
    #[serde(rename = "detector")]
    pub detectors: Vec<DetectorSpec>,
}

impl DetectConfig {
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        if let Err(Error::Validation(v)) = self.heavy_tail.validate() {
            p.extend(v);
        }
        if self.n_trials == 0 {
            p.push("n_trials must be at least 1".to_string());
        }
        if self.change_point > self.horizon {
            p.push(format!("change_point {} exceeds horizon {}", self.change_point, self.horizon));
        }
        for (name, d) in [("pre", &self.pre), ("post", &self.post)] {
            if let Err(e) = d.validate() {
                p.push(format!("{name}: {e}"));
            }
        }
        if self.detectors.is_empty() {
            p.push("at least one [[detector]] is required".to_string());
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(p))
        }
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<(Self, toml::Table)> {
        let (cfg, doc): (Self, _) = load_with_overrides(path, overrides, &["detector"])?;
        cfg.validate()?;
        Ok((cfg, doc))
    }
}

/// Parses `key=value` strings.
pub fn parse_overrides(raw: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for r in raw {
        match r.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => out.push((k.trim().to_string(), v.trim().to_string())),
            _ => bad.push(format!("override {r:?} is not key=value")),
        }
    }
    if bad.is_empty() {
        Ok(out)
    } else {
        Err(Error::Validation(bad))
    }
}

fn parse_value(raw: &str) -> toml::Value {
    format!("x = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(table: &mut toml::Table, path: &[&str], value: toml::Value) {
    match path {
        [] => {}
        [last] => {
            table.insert((*last).to_string(), value);
        }
        [head, rest @ ..] => {
            let entry = table.entry((*head).to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            if let toml::Value::Table(t) = entry {
                set_path(t, rest, value);
            }
        }
    }
}

/// Applies overrides to a document. `lists` names the arrays of tables
/// (policies, detectors) that bare keys may target; each element's `type`
/// or `kind` selects it by prefix.
pub fn apply_overrides<T: for<'de> Deserialize<'de>>(
    doc: &mut toml::Table,
    overrides: &[(String, String)],
    lists: &[&str],
) -> Result<()> {
    let mut problems = Vec::new();
    for (key, raw) in overrides {
        let value = parse_value(raw);
        let parts: Vec<&str> = key.split('.').collect();
        if parts.len() == 1 && doc.contains_key(key) {
            doc.insert(key.clone(), value);
            continue;
        }
        let mut applied = false;
        for list in lists {
            let Some(toml::Value::Array(items)) = doc.get_mut(*list) else { continue };
            for item in items.iter_mut() {
                let toml::Value::Table(t) = item else { continue };
                let tag = t.get("type").or_else(|| t.get("kind")).and_then(|v| v.as_str()).unwrap_or("").to_string();
                let prefixed = parts.len() > 1 && is_tag_prefix(parts[0]);
                if prefixed && parts[0] != tag {
                    continue;
                }
                let path: &[&str] = if prefixed { &parts[1..] } else { &parts };
                let mut trial = t.clone();
                set_path(&mut trial, path, value.clone());
                if accepts(&trial, *list) {
                    *t = trial;
                    applied = true;
                }
            }
        }
        if !applied {
            problems.push(format!("override key {key:?} matches no field"));
        }
    }
    if problems.is_empty() {
        let _: T = toml::Value::Table(doc.clone()).try_into()?;
        Ok(())
    } else {
        Err(Error::Validation(problems))
    }
}

fn is_tag_prefix(s: &str) -> bool {
    matches!(
        s,
        "robust_cpd_ucb" | "robust_ucb" | "sliding_window_ucb" | "monitored_ucb" | "uniform" | "oracle" | "catoni" | "bernstein"
    )
}

fn accepts(item: &toml::Table, list: &str) -> bool {
    let v = toml::Value::Table(item.clone());
    match list {
        "policy" => v.try_into::<PolicyConfig>().is_ok(),
        "detector" => v.try_into::<DetectorSpec>().is_ok(),
        _ => false,
    }
}

fn load_with_overrides<T: for<'de> Deserialize<'de>>(
    path: &Path,
    overrides: &[(String, String)],
    lists: &[&str],
) -> Result<(T, toml::Table)> {
    let text = std::fs::read_to_string(path)?;
    let mut doc: toml::Table = text.parse()?;
    apply_overrides::<T>(&mut doc, overrides, lists)?;
    let cfg: T = toml::Value::Table(doc.clone()).try_into()?;
    Ok((cfg, doc))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"
name = "demo"
instance = "inst.toml"
n_trials = 3
seed_base = 1

[[policy]]
type = "robust_cpd_ucb"
n_min = 30

[[policy]]
type = "sliding_window_ucb"

[[policy]]
type = "monitored_ucb"
window = 50
"#;

    fn overridden(pairs: &[(&str, &str)]) -> Result<ExperimentConfig> {
        let mut doc: toml::Table = DOC.parse().unwrap();
        let o: Vec<(String, String)> = pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        apply_overrides::<ExperimentConfig>(&mut doc, &o, &["policy"])?;
        Ok(toml::Value::Table(doc).try_into()?)
    }

    #[test]
    fn bare_and_prefixed_keys() {
        let c = overridden(&[("seed_base", "7"), ("n_min", "50"), ("monitored_ucb.window", "20")]).unwrap();
        assert_eq!(c.seed_base, 7);
        let PolicyConfig::RobustCpdUcb(a) = &c.policies[0] else { panic!() };
        assert_eq!(a.n_min, Some(50));
        let PolicyConfig::MonitoredUcb(m) = &c.policies[2] else { panic!() };
        assert_eq!(m.window, 20);
        let c = overridden(&[("robust_cpd_ucb.sub_policy.variance_factor", "1.0")]).unwrap();
        let PolicyConfig::RobustCpdUcb(a) = &c.policies[0] else { panic!() };
        assert_eq!(a.sub_policy.variance_factor, 1.0);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(overridden(&[("no_such_field", "1")]), Err(Error::Validation(_))));
    }

    #[test]
    fn override_parsing() {
        let o = parse_overrides(&["a=1".into(), "b = x".into()]).unwrap();
        assert_eq!(o[1], ("b".to_string(), "x".to_string()));
        assert!(parse_overrides(&["novalue".into()]).is_err());
    }
}
