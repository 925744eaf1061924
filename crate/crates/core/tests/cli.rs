//! End-to-end runs of the `robust-cpd` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robust-cpd"))
}

fn experiments() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const INSTANCE: &str = r#"
k = 2
horizon = 120
breakpoints = [60]

[heavy_tail]
epsilon = 1.0
v = 1.0

[[epoch]]
arms = [
    { kind = "gaussian", mean = 1.0, sigma = 1.0 },
    { kind = "gaussian", mean = 0.0, sigma = 1.0 },
]

[[epoch]]
arms = [
    { kind = "gaussian", mean = 0.0, sigma = 1.0 },
    { kind = "gaussian", mean = 1.0, sigma = 1.0 },
]
"#;

const EXPERIMENT: &str = r#"
name = "tiny"
instance = "instance.toml"
n_trials = 2
seed_base = 5

[[policy]]
type = "robust_cpd_ucb"
n_min = 5
thinning = 1.5

[[policy]]
type = "sliding_window_ucb"
"#;

#[test]
fn simulate_writes_csv_and_metadata_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "instance.toml", INSTANCE);
    let cfg = write(dir.path(), "exp.toml", EXPERIMENT);
    let out = dir.path().join("out/results.csv");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "n_trials=3",
        "sliding_window_ucb.window=30",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("round,mean_regret,std_regret,policy"));
    assert_eq!(lines.count(), 2 * 120);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["seeds"].as_array().unwrap().len(), 3);
    assert_eq!(meta["config"]["n_trials"], 3);
    assert_eq!(meta["config"]["policy"][1]["window"], 30);
    let overrides: Vec<&str> = meta["overrides"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(overrides, ["n_trials=3", "sliding_window_ucb.window=30"]);
    assert!(meta["instance_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn simulate_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "instance.toml", INSTANCE);
    let cfg = write(dir.path(), "exp.toml", EXPERIMENT);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        assert!(run(&["simulate", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "instance.toml", INSTANCE);
    let cfg = write(dir.path(), "exp.toml", EXPERIMENT);
    let cfg = cfg.to_str().unwrap();
    let out = dir.path().join("o.csv");
    let out = out.to_str().unwrap();

    let missing = run(&["simulate", "--config", "/nonexistent/exp.toml", "--output", out]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("does not exist"));

    let no_output = run(&["simulate", "--config", cfg]);
    assert_eq!(no_output.status.code(), Some(1));

    let unknown = run(&["simulate", "--config", cfg, "--output", out, "no_such_key=1"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("no_such_key"));

    let malformed = run(&["simulate", "--config", cfg, "--output", out, "n_trials"]);
    assert_eq!(malformed.status.code(), Some(1));

    let bad_value = run(&["simulate", "--config", cfg, "--output", out, "n_trials=0"]);
    assert_eq!(bad_value.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // the instance file referenced by the experiment is missing
    let cfg = write(dir.path(), "exp.toml", EXPERIMENT);
    let out = dir.path().join("o.csv");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_instance_names_failing_arm() {
    let dir = tempfile::tempdir().unwrap();
    let bad = INSTANCE.replacen("sigma = 1.0 },\n    { kind = \"gaussian\", mean = 1.0, sigma = 1.0 }", "sigma = 1.0 },\n    { kind = \"gaussian\", mean = 1.0, sigma = 2.0 }", 1);
    assert_ne!(bad, INSTANCE);
    let p = write(dir.path(), "bad.toml", &bad);
    let o = run(&["check-instance", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("epoch 1 arm 1"), "{err}");

    let good = write(dir.path(), "good.toml", INSTANCE);
    let o = run(&["check-instance", "--config", good.to_str().unwrap(), "n_min=5"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("assumption (n_min = 5"));
}

#[test]
fn bounds_reports_table_instance_as_unbounded() {
    let p = experiments().join("instances/table1_gaussian.toml");
    let o = run(&["bounds", "--config", p.to_str().unwrap()]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["infinite"], true);
    assert!(report["lower_bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn detect_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "det.toml",
        r#"
name = "tiny_detect"
horizon = 200
change_point = 100
n_trials = 2
seed_base = 1
heavy_tail = { epsilon = 1.0, v = 1.0 }
pre = { kind = "gaussian", mean = 0.0, sigma = 1.0 }
post = { kind = "gaussian", mean = 3.0, sigma = 1.0 }

[[detector]]
kind = "bernstein"
gamma = 0.01
n_min = 10
"#,
    );
    let out = dir.path().join("det.json");
    let o = run(&["detect", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "horizon=300"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["config"]["horizon"], 300);
    assert_eq!(report["reports"][0]["report"]["outcomes"].as_array().unwrap().len(), 2);
}

#[test]
fn fit_prices_and_lower_bound_instance_write_instances() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("Date,Close\n");
    for i in 0..60 {
        csv.push_str(&format!("d{i},{}\n", if i < 30 { 10.0 } else { 20.0 } + (i % 3) as f64));
    }
    write(dir.path(), "a.csv", &csv);
    let cfg = write(
        dir.path(),
        "fit.toml",
        r#"
heavy_tail = { epsilon = 0.5, v = 3.0 }
pareto_shape = 2.0
[[series]]
path = "a.csv"
segments = 2
"#,
    );
    let out = dir.path().join("inst.toml");
    let o = run(&["fit-prices", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let spec = robust_cpd::environments::InstanceSpec::load(&out).unwrap();
    assert_eq!(spec.breakpoints, vec![30]);

    let lb = write(
        dir.path(),
        "lb.toml",
        "k = 3\nepochs = 2\nhorizon = 100\nheavy_tail = { epsilon = 1.0, v = 1.0 }\n",
    );
    let out = dir.path().join("lb_inst.toml");
    let o = run(&["lower-bound-instance", "--config", lb.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let spec = robust_cpd::environments::InstanceSpec::load(&out).unwrap();
    assert_eq!(spec.breakpoints, vec![50]);
}

#[test]
fn shipped_configs_parse() {
    let dir = experiments();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_str().unwrap().to_string();
        if p.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        if name.starts_with("detect_") || name.starts_with("false_alarm") {
            robust_cpd::harness::DetectConfig::load(&p, &[]).unwrap();
        } else if name == "crypto_fit.toml" || name == "lower_bound.toml" {
            continue;
        } else {
            let (cfg, _) = robust_cpd::harness::ExperimentConfig::load(&p, &[]).unwrap();
            robust_cpd::environments::InstanceSpec::load(&cfg.instance_path(&p)).unwrap();
        }
    }
}
