use std::fs;
use std::path::{Path, PathBuf};

use kwh_cli::config::{ExperimentConfig, OperatorSpec, TransformSpec, WindowSpec};
use kwh_cli::demo::block_basis_config;
use kwh_cli::report::{Verdict, VerificationReport};
use kwh_cli::run;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kwh-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, config: &ExperimentConfig) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn run_to(dir: &Path, args: &[&str]) -> (i32, Option<VerificationReport>) {
    let out = dir.join("report.json");
    let _ = fs::remove_file(&out);
    let mut full = vec!["kwh"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let code = run(full);
    let report = fs::read_to_string(&out).ok().map(|t| VerificationReport::from_json(&t).unwrap());
    (code, report)
}

fn number(report: &VerificationReport, check: &str, key: &str) -> f64 {
    report.record(check).unwrap().details[key].as_f64().unwrap()
}

#[test]
fn analyze_block_basis_reports_unit_bounds() {
    let dir = scratch("analyze");
    let cfg = write_config(&dir, &block_basis_config(64, 8, 3));
    let (code, report) = run_to(&dir, &["analyze", "--config", cfg.to_str().unwrap()]);
    let report = report.unwrap();
    assert_eq!(code, 0);
    assert!((number(&report, "kframe_bounds", "a_opt") - 1.0).abs() < 1e-9);
    assert!((number(&report, "kframe_bounds", "b_k") - 1.0).abs() < 1e-9);
    assert_eq!(report.record("psd_bounds").unwrap().verdict, Verdict::Pass);
    assert!(report.environment.config_hash.is_some());
}

#[test]
fn zero_window_is_degenerate_and_fails() {
    let dir = scratch("zero");
    let mut c = block_basis_config(16, 4, 0);
    c.window = WindowSpec::Indicator {
        lengths: vec![4],
        height: 0.0,
    };
    let cfg = write_config(&dir, &c);
    let (code, report) = run_to(&dir, &["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    let rec = report.unwrap().record("kframe_bounds").unwrap().clone();
    assert_eq!(rec.verdict, Verdict::Fail);
    assert!(rec.details["status"].as_str().unwrap().starts_with("degenerate"));
}

#[test]
fn malformed_configs_exit_with_two() {
    let dir = scratch("malformed");
    let path = dir.join("bad.json");
    fs::write(&path, "{ \"grid\": [8], ").unwrap();
    assert_eq!(run(["kwh", "analyze", "--config", path.to_str().unwrap()]), 2);
    let mut v = serde_json::to_value(block_basis_config(16, 4, 0)).unwrap();
    v["surprise"] = serde_json::json!(1);
    fs::write(&path, v.to_string()).unwrap();
    assert_eq!(run(["kwh", "analyze", "--config", path.to_str().unwrap()]), 2);
    assert_eq!(run(["kwh", "analyze", "--config", dir.join("missing.json").to_str().unwrap()]), 2);
    assert_eq!(run(["kwh", "frobnicate"]), 2);
}

#[test]
fn verify_all_passes_with_unitary_transform() {
    let dir = scratch("verify-all");
    let cfg = write_config(&dir, &block_basis_config(64, 8, 3));
    let (code, report) = run_to(&dir, &["verify", "--config", cfg.to_str().unwrap(), "--all"]);
    let report = report.unwrap();
    assert_eq!(code, 0, "{}", report.to_json());
    for name in kwh_cli::checks::CHECKS {
        assert!(report.record(name).is_some(), "missing {name}");
    }
    assert!(report.records.iter().all(|r| r.passed()));
    assert_eq!(report.record("transform").unwrap().verdict, Verdict::Pass);
}

#[test]
fn doubling_transform_reports_informational_flag() {
    let dir = scratch("double");
    let mut c = block_basis_config(64, 8, 3);
    c.u = Some(TransformSpec {
        operator: OperatorSpec::Identity,
        unitary: false,
        scale: 2.0,
    });
    let cfg = write_config(&dir, &c);
    let (code, report) = run_to(&dir, &["verify", "--config", cfg.to_str().unwrap(), "transform"]);
    let report = report.unwrap();
    assert_eq!(code, 0);
    let t = report.record("transform").unwrap();
    assert_eq!(t.details["general_lower_a"], true);
    assert_eq!(t.details["general_upper_b"], true);
    assert!((number(&report, "transform", "a2") - 4.0 * number(&report, "transform", "a1")).abs() < 1e-9);
    let info = report.record("transform_estimates").unwrap();
    assert_eq!(info.verdict, Verdict::Info);
    assert_eq!(info.details["upper_a_inverse_norm"], false);
}

#[test]
fn transform_without_operand_is_an_input_error() {
    let dir = scratch("no-u");
    let mut c = block_basis_config(16, 4, 1);
    c.u = None;
    let cfg = write_config(&dir, &c);
    assert_eq!(run(["kwh", "verify", "--config", cfg.to_str().unwrap(), "transform"]), 2);
    assert_eq!(run(["kwh", "verify", "--config", cfg.to_str().unwrap(), "nonsense"]), 2);
    let (code, report) = run_to(&dir, &["verify", "--config", cfg.to_str().unwrap(), "--all"]);
    assert_eq!(code, 0);
    assert_eq!(report.unwrap().record("transform").unwrap().verdict, Verdict::Info);
}

#[test]
fn block_basis_demo_writes_plot_data() {
    let dir = scratch("demo");
    let plots = dir.join("plots");
    let (code, report) = run_to(&dir, &["demo", "block-basis", "--plot-dir", plots.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(report.unwrap().records.iter().all(|r| r.passed()));
    let spectrum = fs::read_to_string(plots.join("spectrum.csv")).unwrap();
    let mut lines = spectrum.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue"));
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 64);
    assert!(values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    let p = fs::read_to_string(plots.join("periodization.csv")).unwrap();
    assert!(p.starts_with("t,p_t\n"));
    assert_eq!(p.lines().count(), 65);
    assert!(plots.join("coefficients.csv").exists());
}

#[test]
fn douglas_demo_and_unknown_demo() {
    let dir = scratch("demo-douglas");
    let plots = dir.join("plots");
    let (code, report) = run_to(&dir, &["demo", "douglas", "--plot-dir", plots.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report.unwrap().records.len(), 20);
    let table = fs::read_to_string(plots.join("douglas.csv")).unwrap();
    assert_eq!(table.lines().count(), 21);
    assert_eq!(run(["kwh", "demo", "nope"]), 2);
}

#[test]
fn report_round_trips_and_is_reproducible() {
    let dir = scratch("roundtrip");
    let cfg = write_config(&dir, &block_basis_config(32, 4, 5));
    let args = ["verify", "--config", cfg.to_str().unwrap(), "--all"];
    let (_, first) = run_to(&dir, &args);
    let (_, second) = run_to(&dir, &args);
    let (first, second) = (first.unwrap(), second.unwrap());
    let text = first.to_json();
    assert_eq!(VerificationReport::from_json(&text).unwrap(), first);
    assert_eq!(first.environment.config_hash, second.environment.config_hash);
    assert_eq!(first.without_timings(), second.without_timings());
}

#[test]
fn overrides_change_the_hash_and_tolerances() {
    let dir = scratch("overrides");
    let cfg = write_config(&dir, &block_basis_config(16, 4, 1));
    let (_, base) = run_to(&dir, &["analyze", "--config", cfg.to_str().unwrap()]);
    let (_, tuned) = run_to(
        &dir,
        &["analyze", "--config", cfg.to_str().unwrap(), "--tol", "1e-6", "--seed", "9"],
    );
    let (base, tuned) = (base.unwrap(), tuned.unwrap());
    assert_ne!(base.environment.config_hash, tuned.environment.config_hash);
    assert_eq!(tuned.environment.tolerances.psd_tol, 1e-6);
    assert_eq!(tuned.environment.seed, 9);
    assert_eq!(run(["kwh", "analyze", "--config", cfg.to_str().unwrap(), "--rank-threshold", "2"]), 2);
}

#[test]
fn csv_window_and_matrix_operands() {
    let dir = scratch("csv");
    let mut window = String::from("re,im\n");
    for t in 0..8 {
        window.push_str(if t < 2 { "0.7071067811865476,0\n" } else { "0,0\n" });
    }
    fs::write(dir.join("window.csv"), window).unwrap();
    let mut k = String::new();
    for i in 0..8 {
        k.push_str(&format!("{i},{},1,0\n", (i + 1) % 8));
    }
    fs::write(dir.join("k.csv"), k).unwrap();
    let mut c = block_basis_config(8, 2, 0);
    c.window = WindowSpec::Csv {
        path: "window.csv".into(),
    };
    c.k = OperatorSpec::MatrixCsv { path: "k.csv".into() };
    c.u = None;
    let cfg = write_config(&dir, &c);
    let (code, report) = run_to(&dir, &["analyze", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!((number(&report.unwrap(), "kframe_bounds", "a_opt") - 1.0).abs() < 1e-9);

    fs::write(dir.join("k.csv"), "0,9,1,0\n").unwrap();
    assert_eq!(run(["kwh", "analyze", "--config", cfg.to_str().unwrap()]), 2);
}

#[test]
fn suite_at_smallest_cap_is_deterministic() {
    let a = kwh_cli::suite::run_suite(3, 4);
    let b = kwh_cli::suite::run_suite(3, 4);
    assert_eq!(a.without_timings().to_json(), b.without_timings().to_json());
    assert!(a.records.len() > 20);
    assert_eq!(a.environment.size_cap, Some(4));
}
