use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SCENARIO: &str = r#"
name = "cli"
n_paths = 2
model = { kind = "cir" }
params = { alpha = 0.2, theta = 5.0, gamma = 0.5, nu0 = 0.2 }
[sampling]
sim_step_seconds = 10
price_mesh_seconds = [60]
grid_multiples = [1]
eval_days = 2
[tuning]
mode = "oracle"
"#;

const EMPIRICAL: &str = r#"
mode = "fixed"
kappa = 1.5
grid_multiples = [1]
[ingest]
mesh_seconds = 60
session_seconds = 21600
"#;

fn harness(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harness")).args(args).current_dir(dir).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = harness(&["selftest"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);
}

#[test]
fn scenario_writes_rows_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SCENARIO);
    let out = harness(&["scenario", "--config", &cfg, "--out-dir", "out", "--workers", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/scenario.csv")).unwrap();
    assert!(csv.starts_with("# schema=1,config_sha256="));
    assert_eq!(csv.lines().count(), 3);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/scenario.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["subcommand"], "scenario");
    assert_eq!(meta["seed"], 1);
    assert_eq!(meta["config"]["n_paths"], 2);

    let again = harness(&["scenario", "--config", &cfg, "--out-dir", "again", "--workers", "1", "--format", "json"], dir.path());
    assert!(again.status.success());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("again/scenario.json")).unwrap()).unwrap();
    assert!(json.to_string().contains("mean_rel_bias"));
}

#[test]
fn simulated_prices_feed_the_empirical_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SCENARIO);
    let out = harness(&["simulate", "--config", &cfg, "--out-dir", "sim"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let prices = dir.path().join("sim/path_0000.csv");
    assert!(fs::read_to_string(&prices).unwrap().starts_with("timestamp,price,variance"));
    let ecfg = write(dir.path(), "e.toml", EMPIRICAL);
    let out = harness(&["empirical", "--config", &ecfg, "--prices", prices.to_str().unwrap(), "--out-dir", "emp"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = fs::read_to_string(dir.path().join("emp/empirical.csv")).unwrap();
    assert!(rows.lines().count() > 5);
}

#[test]
fn exit_codes_distinguish_config_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &SCENARIO.replace("theta = 5.0", "theta = 0.1"));
    let out = harness(&["scenario", "--config", &bad], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params"));
    assert_eq!(harness(&["scenario"], dir.path()).status.code(), Some(2));

    let ecfg = write(dir.path(), "e.toml", EMPIRICAL);
    let out = harness(&["empirical", "--config", &ecfg, "--prices", "missing.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let garbage = write(dir.path(), "g.csv", "timestamp,price\nnot-a-time,1\n");
    let out = harness(&["empirical", "--config", &ecfg, "--prices", &garbage], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
}
