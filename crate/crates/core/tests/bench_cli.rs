use std::fs;

use nested_mlmc::bench::{
    csv_header, read_csv, run_benchmark, write_csv, BenchmarkRecord, ExperimentConfig,
    TauSweepRecord,
};
use nested_mlmc::cli;

const TINY: &str = r#"
schema_version = 1
seed = 5

[calibration]
k_grid = [4, 8]
n_pilot = 1000
include_c2 = false

[benchmark]
estimators = ["nested", "ml2r_table2", "mlmc_table1"]
budgets = [1e4]
replications = 3

[tau_sweep]
budget = 1e4
taus = [0, 50, 100]
replications = 3
"#;

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut argv = vec!["nested-mlmc"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn write_config(dir: &std::path::Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn benchmark_csv_columns_are_fixed() {
    let expected = "estimator,kind,rule,grid_index,budget,epsilon,tau,j,k,levels,q,outer_counts,\
planned_cost,realized_cost,mse_proxy,replications,seed,cdf_threshold,cdf_reference,cdf_mean,\
cdf_bias,cdf_rmse,cdf_rmse_low,cdf_rmse_high,quantile_level,quantile_reference,quantile_mean,\
quantile_bias,quantile_rmse,quantile_rmse_low,quantile_rmse_high,quantile_flagged";
    assert_eq!(csv_header::<BenchmarkRecord>().unwrap().join(","), expected);
    let expected = "tau,budget,kind,rule,status,epsilon,j,k,levels,planned_cost,realized_cost,\
replications,seed,cdf_mse,cdf_rmse_low,cdf_rmse_high,efficiency,efficiency_low,efficiency_high";
    assert_eq!(csv_header::<TauSweepRecord>().unwrap().join(","), expected);
}

#[test]
fn benchmark_is_reproducible_and_round_trips() {
    let cfg = ExperimentConfig::from_toml_str(TINY).unwrap();
    let a = run_benchmark(&cfg, &mut |_| {}).unwrap();
    let b = run_benchmark(&cfg, &mut |_| {}).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 3);
    for r in &a {
        assert!(r.realized_cost <= r.planned_cost * 1.05);
        assert!(r.cdf_rmse_low <= r.cdf_rmse && r.cdf_rmse <= r.cdf_rmse_high);
    }

    let mut buf = Vec::new();
    write_csv(&mut buf, &a).unwrap();
    let back: Vec<BenchmarkRecord> = read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, a);

    let json = serde_json::to_string(&a).unwrap();
    let back: Vec<BenchmarkRecord> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, a);
}

#[test]
fn alm_reference_prints_the_quantile() {
    let (code, out) = run(&["alm-reference"]);
    assert_eq!(code, 0);
    assert!(out.contains("q99.5 = 252.758739"), "{out}");
}

#[test]
fn plan_prints_json() {
    let (code, out) = run(&["plan", "--epsilon", "1e-3", "--tau", "25"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rule"], "optimized");
    assert_eq!(v["plan"]["kind"], "ml2r");
    assert_eq!(v["tau"], 25.0);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--bogus", "plan"]).0, 2);
    assert_eq!(run(&["plan"]).0, 2);
    assert_eq!(run(&["plan", "--epsilon", "-1"]).0, 2);
    assert_eq!(run(&["plan", "--budget", "1e-3"]).0, 3);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        "schema_version = 1\n[benchmark]\nreplicatons = 4\n",
        "schema_version = 1\n[benchmark]\nreplications = \"four\"\n",
        "schema_version = 1\n[benchmark]\nreplications = 1\n",
        "schema_version = 99\n",
        "schema_version = 1\nconstants_file = \"missing.json\"\n",
    ];
    for text in bad {
        let p = write_config(dir.path(), text);
        let (code, _) = run(&["--config", &p, "plan", "--epsilon", "1e-3"]);
        assert_eq!(code, 2, "{text}");
    }
}

#[test]
fn benchmark_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let out_s = out.to_string_lossy().into_owned();
    let (code, stdout) = run(&["--config", &p, "--out", &out_s, "benchmark"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), out.join("benchmark.csv").to_string_lossy());
    let csv = fs::read_to_string(out.join("benchmark.csv")).unwrap();
    let rows: Vec<BenchmarkRecord> = read_csv(csv.as_bytes()).unwrap();
    assert_eq!(rows.len(), 3);

    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "benchmark");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);

    let (code, _) = run(&[
        "--config",
        &p,
        "--out",
        &out_s,
        "--format",
        "json",
        "benchmark",
    ]);
    assert_eq!(code, 0);
    let json = fs::read_to_string(out.join("benchmark.json")).unwrap();
    let back: Vec<BenchmarkRecord> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rows);
}

#[test]
fn tau_sweep_and_calibrate_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let out_s = out.to_string_lossy().into_owned();
    let (code, _) = run(&["--config", &p, "--out", &out_s, "tau-sweep"]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(out.join("tau_sweep.csv")).unwrap();
    let rows: Vec<TauSweepRecord> = read_csv(csv.as_bytes()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(out.join("tau_sweep_trend.json").exists());

    let (code, _) = run(&["--config", &p, "--out", &out_s, "calibrate"]);
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("calibration.json")).unwrap()).unwrap();
    assert_eq!(report["k_grid"], serde_json::json!([4, 8]));
}

#[test]
fn calibration_report_feeds_back_as_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cal");
    let out_s = out.to_string_lossy().into_owned();
    let p = write_config(dir.path(), TINY);
    assert_eq!(run(&["--config", &p, "--out", &out_s, "calibrate"]).0, 0);
    // Relative to the config file's directory.
    let text = TINY.replacen(
        "seed = 5",
        "seed = 5\nconstants_file = \"cal/calibration.json\"",
        1,
    );
    let p = write_config(dir.path(), &text);
    let (code, out) = run(&["--config", &p, "plan", "--epsilon", "1e-2"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn shipped_config_matches_the_defaults() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/desk.toml");
    let cfg = ExperimentConfig::load(&path).unwrap();
    let defaults = ExperimentConfig {
        constants: cfg.constants.clone(),
        ..ExperimentConfig::default()
    };
    assert_eq!(cfg, defaults);
    assert_eq!(
        cfg.structural_constants(0.0).unwrap(),
        nested_mlmc::optimizer::StructuralConstants::alm_reference(0.0)
    );
}
