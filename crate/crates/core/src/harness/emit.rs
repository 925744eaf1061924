//! Result files: a regret CSV and a JSON metadata sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::experiment::ExperimentResults;
use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct PolicyMetadata {
    pub label: String,
    pub mean_final_regret: f64,
    pub std_final_regret: f64,
    pub mean_detections: f64,
    pub identity_ok: bool,
}

/// Sidecar contents. `config` is the resolved configuration after overrides.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub name: String,
    pub crate_version: String,
    pub config: serde_json::Value,
    pub overrides: Vec<String>,
    pub seeds: Vec<u64>,
    pub instance_hash: Option<String>,
    pub thinning: Vec<Option<f64>>,
    pub policies: Vec<PolicyMetadata>,
}

impl RunMetadata {
    pub fn new(name: &str, config: &toml::Table, overrides: &[(String, String)]) -> Result<Self> {
        Ok(Self {
            name: name.to_string(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            config: serde_json::to_value(config)?,
            overrides: overrides.iter().map(|(k, v)| format!("{k}={v}")).collect(),
            seeds: Vec::new(),
            instance_hash: None,
            thinning: Vec::new(),
            policies: Vec::new(),
        })
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `round,mean_regret,std_regret,policy` rows for every policy and
/// the metadata sidecar next to it.
pub fn emit_results(results: &ExperimentResults, csv_path: &Path, mut meta: RunMetadata) -> Result<()> {
    if let Some(dir) = csv_path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
    writeln!(out, "round,mean_regret,std_regret,policy")?;
    for p in &results.policies {
        for (t, (m, s)) in p.mean_cumulative.iter().zip(&p.std_cumulative).enumerate() {
            writeln!(out, "{},{},{},{}", t + 1, m, s, p.label)?;
        }
    }
    out.flush()?;
    meta.seeds = results.seeds.clone();
    meta.policies = results
        .policies
        .iter()
        .map(|p| PolicyMetadata {
            label: p.label.clone(),
            mean_final_regret: p.mean_final(),
            std_final_regret: p.std_final(),
            mean_detections: p.mean_detections(),
            identity_ok: p.identity_ok,
        })
        .collect();
    std::fs::write(sidecar_path(csv_path), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

/// Reads back `(round, mean, std, policy)` rows.
pub fn read_results(csv_path: &Path) -> Result<Vec<(u64, f64, f64, String)>> {
    let mut rdr = csv::Reader::from_path(csv_path)?;
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiment::PolicySummary;

    fn results(policies: Vec<PolicySummary>) -> ExperimentResults {
        ExperimentResults { horizon: 3, seeds: vec![1, 2], policies }
    }

    #[test]
    fn empty_aggregate_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let meta = RunMetadata::new("x", &toml::Table::new(), &[]).unwrap();
        emit_results(&results(vec![]), &path, meta).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "round,mean_regret,std_regret,policy\n");
        assert!(sidecar_path(&path).exists());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let p = PolicySummary {
            label: "a".into(),
            mean_cumulative: vec![0.1, 0.30000000000000004, 1.0 / 3.0],
            std_cumulative: vec![0.0, 0.5, 1e-17],
            ledgers: vec![],
            identity_ok: true,
        };
        let meta = RunMetadata::new("x", &toml::Table::new(), &[("n_min".into(), "5".into())]).unwrap();
        emit_results(&results(vec![p.clone()]), &path, meta).unwrap();
        let rows = read_results(&path).unwrap();
        assert_eq!(rows.len(), 3);
        for (t, row) in rows.iter().enumerate() {
            assert_eq!(row.0, t as u64 + 1);
            assert_eq!(row.1, p.mean_cumulative[t]);
            assert_eq!(row.2, p.std_cumulative[t]);
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
    }
}
