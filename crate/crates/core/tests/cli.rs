use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mellin_levy::oracles::black_scholes_put;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mellin-levy"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples/configs")
        .join(name)
}

fn run(args: &[&str], cfg: &Path) -> Output {
    let mut cmd = bin();
    cmd.arg(args[0]).arg(cfg).args(&args[1..]);
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn price_json_has_version_and_matches_black_scholes() {
    let out = run(&["price", "--format", "json"], &config("european_gbm.json"));
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["command"], "price");
    let price = v["result"]["price"].as_f64().unwrap();
    assert!((price - black_scholes_put(100.0, 100.0, 0.05, 0.2, 1.0)).abs() < 1e-8);
}

#[test]
fn csv_is_rfc4180_with_full_precision() {
    let out = run(&["price", "--format", "csv"], &config("european_gbm.json"));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.split("\r\n").collect();
    assert_eq!(lines.len(), 3, "{text:?}");
    assert_eq!(lines[2], "");
    assert!(lines[0].starts_with("format_version,price,european_part,premium_part"));
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[0], "1");
    let mantissa = fields[1].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
    let price: f64 = fields[1].parse().unwrap();
    assert!((price - 5.573_526_022_256_971).abs() < 1e-8);
}

#[test]
fn boundary_csv_has_one_row_per_time_step() {
    let out = run(
        &["boundary", "--format", "csv"],
        &config("american_gbm.json"),
    );
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[1], "tau");
    assert_eq!(&header[2], "s_star");
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 65);
    let first: f64 = rows[0][2].parse().unwrap();
    assert_eq!(first, 100.0);
    let last: f64 = rows[64][2].parse().unwrap();
    assert!(last > 75.0 && last < 90.0, "{last}");
}

#[test]
fn out_flag_writes_file_and_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("price.json");
    let out = run(
        &["price", "--format", "json", "--out", path.to_str().unwrap()],
        &config("european_gbm.json"),
    );
    assert_eq!(out.status.code(), Some(0));
    let written: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(written["format_version"], 1);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("price "));
}

#[test]
fn thread_count_does_not_change_output() {
    let one = run(
        &["price", "--format", "json", "--threads", "1"],
        &config("basket2_european.json"),
    );
    let four = run(
        &["price", "--format", "json", "--threads", "4"],
        &config("basket2_european.json"),
    );
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn validate_passes_on_black_scholes() {
    let out = run(
        &["validate", "--format", "json"],
        &config("european_gbm.json"),
    );
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["format_version"], 1);
}

#[test]
fn validate_failure_exits_one() {
    // a contour far too short to resolve the integrand
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
          "model": { "type": "gbm", "vols": [0.2] },
          "option": { "strike": 100.0, "maturity": 1.0, "spot": [100.0], "rate": 0.05 },
          "numerics": { "half_width": [1.0], "nodes": [16] },
          "validation": { "oracles": ["black_scholes"] }
        }"#,
    );
    let out = run(&["validate"], &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn converge_doubles_nodes() {
    let out = run(
        &["converge", "--format", "json"],
        &config("european_gbm.json"),
    );
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["format_version"], 1);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(
        dir.path(),
        r#"{ "model": { "type": "gbm", "vols": [0.2], "volz": 1 },
             "option": { "strike": 100.0, "maturity": 1.0, "spot": [100.0], "rate": 0.05 } }"#,
    );
    let out = run(&["price"], &unknown);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("volz"));

    let missing = dir.path().join("absent.json");
    assert_eq!(run(&["price"], &missing).status.code(), Some(2));

    let not_psd = write_config(
        dir.path(),
        r#"{ "model": { "type": "gbm", "vols": [0.2, 0.2, 0.2],
                        "corr": [[1, 0.9, -0.9], [0.9, 1, 0.9], [-0.9, 0.9, 1]] },
             "option": { "strike": 100.0, "maturity": 1.0, "spot": [30, 30, 30], "rate": 0.05 } }"#,
    );
    let out = run(&["price"], &not_psd);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("eigenvalue"));

    let out = run(&["price", "--threads", "0"], &config("european_gbm.json"));
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["quote"])
        .arg(config("european_gbm.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn four_assets_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "model": { "type": "gbm", "vols": [0.2, 0.2, 0.2, 0.2] },
             "option": { "strike": 100.0, "maturity": 1.0, "spot": [25, 25, 25, 25], "rate": 0.05 } }"#,
    );
    let out = run(&["price"], &cfg);
    assert_eq!(out.status.code(), Some(3));
}
