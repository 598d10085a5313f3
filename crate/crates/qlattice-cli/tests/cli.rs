//! End-to-end tests of the command-line interface: flag parsing, output
//! formats, exit codes, and the determinism contract.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qlattice"))
}

fn repo_config(name: &str) -> PathBuf {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.pop();
    p.pop();
    p.push("configs");
    p.push(name);
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn eval_degree_zero_is_constant_one() {
    let out = run(&[
        "eval", "--family", "q-meixner", "--params", "b=0.4,c=0.7", "--q", "0.5", "--n", "0",
        "--grid", "0.3:5", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let p: f64 = cols[2].parse().unwrap();
        assert!((p - 1.0).abs() < 1e-13, "p_0 = {p}");
        rows += 1;
    }
    assert_eq!(rows, 5);
}

#[test]
fn eval_asc1_degree_one_is_x_minus_one_minus_a() {
    let out = run(&[
        "eval", "--family", "al-salam-carlitz-1", "--params", "a=0.5", "--q", "0.5", "--n", "1",
        "--grid", "-1.3:6", "--format", "csv",
    ]);
    assert!(out.status.success());
    for line in stdout_of(&out).lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let x: f64 = cols[1].parse().unwrap();
        let p: f64 = cols[2].parse().unwrap();
        assert!((p - (x - 1.5)).abs() < 1e-12 * (1.0 + x.abs()));
    }
}

#[test]
fn eval_json_and_csv_carry_identical_values() {
    let args_common = [
        "eval", "--family", "askey-wilson", "--params", "a=0.21,b=0.33,c=0.41,d=0.47", "--q",
        "0.5", "--n", "3", "--grid", "2.3:6",
    ];
    let csv = run(&[&args_common[..], &["--format", "csv"]].concat());
    let json = run(&[&args_common[..], &["--format", "json"]].concat());
    assert!(csv.status.success() && json.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout_of(&json)).unwrap();
    let rows = parsed.as_array().unwrap();
    let csv_text = stdout_of(&csv);
    let csv_rows: Vec<&str> = csv_text.lines().skip(1).collect();
    assert_eq!(rows.len(), csv_rows.len());
    for (jrow, crow) in rows.iter().zip(&csv_rows) {
        let cols: Vec<&str> = crow.split(',').collect();
        let p_json = jrow["p_re"].as_f64().unwrap();
        let p_csv: f64 = cols[2].parse().unwrap();
        assert_eq!(p_json, p_csv, "round-trip mismatch");
        let x_json = jrow["x"]["re"].as_f64().unwrap();
        let x_csv: f64 = cols[1].parse().unwrap();
        assert_eq!(x_json, x_csv);
    }
}

#[test]
fn eval_by_x_list_inverts_the_lattice() {
    let out = run(&[
        "eval", "--family", "al-salam-carlitz-1", "--params", "a=0.5", "--q", "0.5", "--n", "1",
        "--x", "0.25,0.7", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let mut lines = text.lines().skip(1);
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let x: f64 = first[1].parse().unwrap();
    assert!((x - 0.25).abs() < 1e-12);
}

#[test]
fn eval_rejects_bad_parameters() {
    let out = run(&["eval", "--family", "nonsense", "--q", "0.5", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "eval", "--family", "al-salam-carlitz-1", "--params", "a=zebra", "--q", "0.5", "--n", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // a = 0 is excluded by the family itself
    let out = run(&[
        "eval", "--family", "al-salam-carlitz-1", "--params", "a=0.0", "--q", "0.5", "--n", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn coeffs_ttrr_monic_alpha_column() {
    let out = run(&[
        "coeffs", "--family", "al-salam-carlitz-1", "--params", "a=0.5", "--q", "0.5", "--n-max",
        "6", "--kind", "ttrr", "--format", "json",
    ]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    for row in rows.as_array().unwrap() {
        let alpha = row["alpha"]["re"].as_f64().unwrap();
        assert!((alpha - 1.0).abs() < 1e-10, "monic family must have alpha = 1, got {alpha}");
    }
}

#[test]
fn coeffs_structure_reports_display_comparison() {
    let out = run(&[
        "coeffs", "--family", "q-meixner", "--params", "b=0.4,c=0.7", "--q", "0.5", "--n-max",
        "3", "--kind", "structure", "--format", "json",
    ]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let arr = rows.as_array().unwrap();
    // degree 0 has no display
    assert!(arr[0]["display_matches"].is_null());
    for row in &arr[1..] {
        // the printed displays disagree with the solved values (transcription
        // errors in the source); the flag must reflect the actual comparison
        let e = row["e"]["re"].as_f64().unwrap();
        let de = row["display_e"]["re"].as_f64().unwrap();
        let matches = row["display_matches"].as_bool().unwrap();
        let rel = (e - de).abs() / 1.0f64.max(e.abs()).max(de.abs());
        assert_eq!(matches, rel < 1e-6, "flag must track the e-slot comparison");
    }
}

#[test]
fn coeffs_n0_row_degenerates_gracefully() {
    let out = run(&[
        "coeffs", "--family", "q-meixner", "--params", "b=0.4,c=0.7", "--q", "0.5", "--n-max",
        "0", "--kind", "ttrr", "--format", "json",
    ]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let arr = rows.as_array().unwrap();
    assert_eq!(arr.len(), 1);
    assert_eq!(arr[0]["gamma"]["re"].as_f64().unwrap(), 0.0);
}

#[test]
fn verify_default_config_passes() {
    let report = std::env::temp_dir().join("qlattice-verify-default.json");
    let out = run(&[
        "verify",
        "--config",
        repo_config("default.toml").to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    let reports: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(!reports.as_array().unwrap().is_empty());
}

#[test]
fn verify_perturbed_config_fails_and_names_the_check() {
    let out = run(&[
        "verify",
        "--config",
        repo_config("perturbed-sigma.toml").to_str().unwrap(),
        "--out",
        std::env::temp_dir().join("qlattice-verify-perturbed.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("pearson"), "failing check named on stderr: {stderr}");
}

#[test]
fn verify_missing_config_is_a_usage_error() {
    let out = run(&["verify", "--config", "/definitely/not/here.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_is_byte_deterministic() {
    let a = std::env::temp_dir().join("qlattice-det-a.json");
    let b = std::env::temp_dir().join("qlattice-det-b.json");
    for path in [&a, &b] {
        let out = run(&[
            "verify",
            "--config",
            repo_config("default.toml").to_str().unwrap(),
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let ba = std::fs::read(&a).unwrap();
    let bb = std::fs::read(&b).unwrap();
    assert_eq!(ba, bb, "same config and seed must give byte-identical reports");
}

#[test]
fn report_numbers_are_finite() {
    let report = std::env::temp_dir().join("qlattice-verify-finite.json");
    let out = run(&[
        "verify",
        "--config",
        repo_config("default.toml").to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&report).unwrap();
    let reports: serde_json::Value = serde_json::from_str(&text).unwrap();
    fn walk(v: &serde_json::Value) {
        match v {
            serde_json::Value::Number(n) => {
                assert!(n.as_f64().map(|f| f.is_finite()).unwrap_or(true));
            }
            serde_json::Value::Array(a) => a.iter().for_each(walk),
            serde_json::Value::Object(o) => o.values().for_each(walk),
            _ => {}
        }
    }
    walk(&reports);
}

#[test]
fn tol_env_var_is_honored() {
    // an absurdly tight tolerance makes the held-out validation fail
    let out = bin()
        .args([
            "coeffs", "--family", "al-salam-carlitz-1", "--params", "a=0.5", "--q", "0.5",
            "--n-max", "2", "--kind", "ttrr", "--format", "json",
        ])
        .env("QLATTICE_TOL", "1e-30")
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let notes: Vec<String> = rows
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|r| r["note"].as_str().map(String::from))
        .collect();
    assert!(
        notes.iter().any(|n| n.contains("error")),
        "rows should surface per-row errors under QLATTICE_TOL=1e-30: {notes:?}"
    );
}
