//! Command-line front end.
//!
//! `robust-cpd <verb> --config <file> [--output <file>] [key=value ...]`

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::detection::n_min_default;
use crate::environments::{instance_from_prices, load_price_csv, lower_bound_instance, InstanceSpec};
use crate::error::{Error, Result};
use crate::estimators::HeavyTailParams;
use crate::harness::config::{apply_overrides, parse_overrides, DetectConfig, ExperimentConfig};
use crate::harness::delay::{detection_delay_experiment, DelayReport};
use crate::harness::emit::RunMetadata;
use crate::harness::{check_assumption, emit_results, run_experiment, theoretical_bounds};
use crate::policies::{eta_at, PolicyConfig};

#[derive(Debug, Parser)]
#[command(name = "robust-cpd", version, about = "Heavy-tailed piecewise-stationary bandit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Run a regret experiment and write the regret CSV plus metadata.
    Simulate(CommandArgs),
    /// Run a detection-delay experiment.
    Detect(CommandArgs),
    /// Fit an instance to price files.
    FitPrices(CommandArgs),
    /// Check moment bounds and the epoch-length assumption of an instance.
    CheckInstance(CommandArgs),
    /// Print the order-level regret bound of an instance.
    Bounds(CommandArgs),
    /// Write a lower-bound construction instance.
    LowerBoundInstance(CommandArgs),
}

#[derive(Debug, Args)]
pub struct CommandArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// `key=value` overrides applied on top of the config file.
    pub overrides: Vec<String>,
}

impl Verb {
    fn args(&self) -> &CommandArgs {
        match self {
            Verb::Simulate(a)
            | Verb::Detect(a)
            | Verb::FitPrices(a)
            | Verb::CheckInstance(a)
            | Verb::Bounds(a)
            | Verb::LowerBoundInstance(a) => a,
        }
    }

    fn needs_output(&self) -> bool {
        matches!(self, Verb::Simulate(_) | Verb::Detect(_) | Verb::FitPrices(_) | Verb::LowerBoundInstance(_))
    }
}

/// Exit status for an error: 1 for invalid input, 2 for runtime failures.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Validation(_)
        | Error::InvalidParameter(_)
        | Error::TomlDe(_)
        | Error::MomentDiverges { .. }
        | Error::InfeasibleMoment { .. }
        | Error::MissingColumn(_)
        | Error::Parse { .. } => 1,
        _ => 2,
    }
}

/// Runs a command and returns the text to print.
pub fn dispatch(verb: &Verb) -> Result<String> {
    let args = verb.args();
    let mut problems = Vec::new();
    if !args.config.exists() {
        problems.push(format!("config file {} does not exist", args.config.display()));
    }
    if verb.needs_output() && args.output.is_none() {
        problems.push("--output is required for this verb".to_string());
    }
    let overrides = match parse_overrides(&args.overrides) {
        Ok(o) => o,
        Err(Error::Validation(p)) => {
            problems.extend(p);
            Vec::new()
        }
        Err(e) => return Err(e),
    };
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let output = args.output.as_deref();
    match verb {
        Verb::Simulate(_) => simulate(&args.config, output.expect("checked"), &overrides),
        Verb::Detect(_) => detect(&args.config, output.expect("checked"), &overrides),
        Verb::FitPrices(_) => fit_prices(&args.config, output.expect("checked"), &overrides),
        Verb::CheckInstance(_) => check_instance(&args.config, &overrides),
        Verb::Bounds(_) => bounds(&args.config, &overrides),
        Verb::LowerBoundInstance(_) => write_lower_bound_instance(&args.config, output.expect("checked"), &overrides),
    }
}

fn simulate(config: &Path, output: &Path, overrides: &[(String, String)]) -> Result<String> {
    let (cfg, doc) = ExperimentConfig::load(config, overrides)?;
    let spec = InstanceSpec::load(&cfg.instance_path(config))?;
    let results = run_experiment(&spec, &cfg.policies, cfg.n_trials, cfg.seed_base)?;
    let mut meta = RunMetadata::new(&cfg.name, &doc, overrides)?;
    meta.instance_hash = Some(spec.content_hash()?);
    meta.thinning = cfg
        .policies
        .iter()
        .map(|p| match p {
            PolicyConfig::RobustCpdUcb(a) => a.thinning,
            _ => None,
        })
        .collect();
    emit_results(&results, output, meta)?;
    let mut text = format!("{}: {} trials, T = {}\n", cfg.name, cfg.n_trials, spec.horizon);
    for p in &results.policies {
        text.push_str(&format!(
            "  {:<16} final regret {:>10.3} +- {:>8.3}  restarts {:.2}\n",
            p.label,
            p.mean_final(),
            p.std_final(),
            p.mean_detections()
        ));
    }
    Ok(text)
}

#[derive(Serialize)]
struct DetectOutput<'a> {
    name: &'a str,
    config: serde_json::Value,
    overrides: Vec<String>,
    reports: Vec<DetectSummary>,
}

#[derive(Serialize)]
struct DetectSummary {
    report: DelayReport,
    false_alarms: usize,
    censored: usize,
    median_delay: Option<u64>,
    mean_delay: Option<f64>,
}

fn detect(config: &Path, output: &Path, overrides: &[(String, String)]) -> Result<String> {
    let (cfg, doc) = DetectConfig::load(config, overrides)?;
    let mut reports = Vec::new();
    let mut text = format!("{}: change after round {}, T = {}\n", cfg.name, cfg.change_point, cfg.horizon);
    for d in &cfg.detectors {
        let det = d.build(cfg.heavy_tail, cfg.horizon)?;
        let r = detection_delay_experiment(
            d.label(),
            cfg.pre,
            cfg.post,
            cfg.change_point,
            cfg.horizon,
            det,
            cfg.n_trials,
            cfg.seed_base,
        )?;
        text.push_str(&format!(
            "  {:<10} false alarms {}  censored {}  median delay {:?}  mean delay {:?}\n",
            r.label,
            r.false_alarms(),
            r.censored(),
            r.median_delay(),
            r.mean_delay()
        ));
        reports.push(DetectSummary {
            false_alarms: r.false_alarms(),
            censored: r.censored(),
            median_delay: r.median_delay(),
            mean_delay: r.mean_delay(),
            report: r,
        });
    }
    let out = DetectOutput {
        name: &cfg.name,
        config: serde_json::to_value(&doc)?,
        overrides: overrides.iter().map(|(k, v)| format!("{k}={v}")).collect(),
        reports,
    };
    write_file(output, &(serde_json::to_string_pretty(&out)? + "\n"))?;
    Ok(text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSeries {
    /// Relative to the config file.
    pub path: PathBuf,
    pub segments: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitPricesConfig {
    pub heavy_tail: HeavyTailParams,
    pub pareto_shape: f64,
    #[serde(default = "default_column")]
    pub column: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    /// Keep only the first `max_rows` rows of every series.
    #[serde(default)]
    pub max_rows: Option<usize>,
    pub series: Vec<PriceSeries>,
}

fn default_column() -> String {
    "Close".to_string()
}

fn default_delimiter() -> String {
    ",".to_string()
}

fn fit_prices(config: &Path, output: &Path, overrides: &[(String, String)]) -> Result<String> {
    let mut doc: toml::Table = std::fs::read_to_string(config)?.parse()?;
    apply_overrides::<FitPricesConfig>(&mut doc, overrides, &[])?;
    let cfg: FitPricesConfig = toml::Value::Table(doc).try_into()?;
    let delim = match cfg.delimiter.as_bytes() {
        [b] => *b,
        _ => return Err(Error::Validation(vec![format!("delimiter {:?} must be one byte", cfg.delimiter)])),
    };
    let base = config.parent().unwrap_or(Path::new("."));
    let mut series = Vec::new();
    for s in &cfg.series {
        series.push(load_price_csv(&base.join(&s.path), &cfg.column, delim)?);
    }
    let len = series.iter().map(Vec::len).min().unwrap_or(0).min(cfg.max_rows.unwrap_or(usize::MAX));
    for s in &mut series {
        s.truncate(len);
    }
    let counts: Vec<usize> = cfg.series.iter().map(|s| s.segments).collect();
    let spec = instance_from_prices(&series, &counts, cfg.heavy_tail, cfg.pareto_shape)?;
    spec.save(output)?;
    Ok(format!(
        "wrote {} ({} arms, T = {}, breakpoints {:?})\n",
        output.display(),
        spec.k,
        spec.horizon,
        spec.breakpoints
    ))
}

/// `n_min` and `eta` used by the diagnostics, from overrides or defaults.
fn diagnostic_params(spec: &InstanceSpec, overrides: &[(String, String)]) -> Result<(u64, f64)> {
    let mut n_min = n_min_default(spec.horizon, spec.heavy_tail.epsilon);
    let mut eta = eta_at(0, spec.k, spec.horizon, 1.0);
    let mut bad = Vec::new();
    for (k, v) in overrides {
        match k.as_str() {
            "n_min" => match v.parse() {
                Ok(n) => n_min = n,
                Err(_) => bad.push(format!("n_min={v} is not an integer")),
            },
            "eta" => match v.parse::<f64>() {
                Ok(e) if e > 0.0 => eta = e,
                _ => bad.push(format!("eta={v} is not a positive number")),
            },
            _ => bad.push(format!("unknown override {k:?} (expected n_min or eta)")),
        }
    }
    if bad.is_empty() {
        Ok((n_min, eta))
    } else {
        Err(Error::Validation(bad))
    }
}

fn check_instance(config: &Path, overrides: &[(String, String)]) -> Result<String> {
    let spec = InstanceSpec::load(config)?;
    let (n_min, eta) = diagnostic_params(&spec, overrides)?;
    let violations = spec.moment_violations(1e-6);
    let report = check_assumption(&spec, n_min, eta);
    let mut text = format!(
        "instance: K = {}, T = {}, {} breakpoints, eps = {}, v = {}\n",
        spec.k,
        spec.horizon,
        spec.upsilon(),
        spec.heavy_tail.epsilon,
        spec.heavy_tail.v
    );
    let q = spec.heavy_tail.order();
    for (j, epoch) in spec.arms_per_epoch.iter().enumerate() {
        for (i, d) in epoch.iter().enumerate() {
            let m = d.centered_moment(q).map_or_else(|e| e.to_string(), |m| format!("{m:.6}"));
            text.push_str(&format!("  epoch {j} arm {i}: mean {:.4}, moment {m}\n", d.mean()));
        }
    }
    text.push_str(&format!("assumption (n_min = {n_min}, eta = {eta:.4}): {}\n", report.holds));
    for e in &report.epochs {
        text.push_str(&format!("  epoch {}: length {} required {}\n", e.epoch, e.length, e.required));
    }
    if !violations.is_empty() {
        let list = violations
            .iter()
            .map(|(j, i, m)| format!("epoch {j} arm {i}: centered moment {m} exceeds v = {}", spec.heavy_tail.v))
            .collect();
        eprint!("{text}");
        return Err(Error::Validation(list));
    }
    Ok(text)
}

fn bounds(config: &Path, overrides: &[(String, String)]) -> Result<String> {
    let spec = InstanceSpec::load(config)?;
    let (_, eta) = diagnostic_params(&spec, overrides)?;
    let report = theoretical_bounds(&spec, eta);
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundConfig {
    pub k: usize,
    pub epochs: usize,
    pub horizon: u64,
    pub heavy_tail: HeavyTailParams,
}

fn write_lower_bound_instance(config: &Path, output: &Path, overrides: &[(String, String)]) -> Result<String> {
    let mut doc: toml::Table = std::fs::read_to_string(config)?.parse()?;
    apply_overrides::<LowerBoundConfig>(&mut doc, overrides, &[])?;
    let cfg: LowerBoundConfig = toml::Value::Table(doc).try_into()?;
    let spec = lower_bound_instance(cfg.k, cfg.epochs, cfg.horizon, cfg.heavy_tail)?;
    spec.save(output)?;
    Ok(format!("wrote {}\n", output.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}
