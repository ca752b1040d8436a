//! End-to-end CLI checks: flag parsing, exit codes, output determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sensornet"))
}

#[test]
fn connectivity_grid_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        let status = bin()
            .args([
                "connectivity",
                "--model",
                "range",
                "--n",
                "1000",
                "--c-grid",
                "-6:6:2",
                "--trials",
                "40",
                "--seed",
                "1",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b, "identical config+seed must be byte-identical");
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 8, "header plus one row per grid point");
    assert!(text.starts_with("model,n,param,c,trials,successes,p_hat,ci_low,ci_high,seed"));
}

#[test]
fn usage_errors_exit_2() {
    let status = bin().args(["connectivity", "--bogus"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    // schema violation caught after parse: unknown model
    let status = bin()
        .args(["connectivity", "--model", "nope", "--n", "10", "--param", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // missing required option
    let status = bin().args(["connectivity", "--model", "range"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn threshold_json_contains_log2_3() {
    let output = bin()
        .args(["compute", "--op", "threshold", "--n", "2", "--theta", "2"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(
        text.contains("1.584962500721156"),
        "expected log2 3 in: {text}"
    );
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.toml");
    std::fs::write(
        &cfg_path,
        "[connectivity]\nmodel = \"er\"\nn = 120\nparam = 0.05\ntrials = 30\nseed = 9\n",
    )
    .unwrap();
    let out = dir.path().join("from_config.csv");
    let status = bin()
        .args(["connectivity", "--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("er,120,0.05"));

    // a flag overrides the config value
    let out2 = dir.path().join("override.csv");
    let status = bin()
        .args(["connectivity", "--config"])
        .arg(&cfg_path)
        .args(["--n", "80", "--out"])
        .arg(&out2)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out2).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("er,80,0.05"));
}

#[test]
fn clocks_smoothing_emits_trace() {
    let output = bin()
        .args([
            "clocks",
            "--topology",
            "path",
            "--n",
            "6",
            "--mode",
            "smooth-sync",
            "--seed",
            "3",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("iteration,error_norm,f_value"));
    assert!(text.lines().count() > 3);
    // error norms head toward zero
    let last = text.lines().last().unwrap();
    let err: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(err < 1e-9, "final error {err}");
}

#[test]
fn capacity_csv_schema() {
    let output = bin()
        .args([
            "capacity", "--n-grid", "64", "--delta", "1", "--kappa", "2", "--seed", "4",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with(
        "n,model,lambda_hat,lambda_hat_scaled,transport_capacity,upper_bound,colors,kappa,seed"
    ));
    assert!(text.lines().nth(1).unwrap().starts_with("64,protocol,"));
}

#[test]
fn compute_fooling_and_interval() {
    let output = bin()
        .args(["compute", "--op", "fooling", "--function", "and", "--n", "2"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["size"], 3);
    assert_eq!(v["exact_maximum"], true);

    let output = bin()
        .args(["compute", "--op", "interval", "--n", "4", "--a", "1", "--b", "2"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let lo = v["lower_bits"].as_f64().unwrap();
    let hi = v["upper_bits"].as_f64().unwrap();
    assert!((lo - 11f64.log2()).abs() < 1e-12);
    assert!((hi - 12f64.log2()).abs() < 1e-12);
}

#[test]
fn compute_table_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("and.txt");
    std::fs::write(&table, "0 0 -> 0\n0 1 -> 0\n1 0 -> 0\n1 1 -> 1\n").unwrap();
    let output = bin()
        .args(["compute", "--op", "tree-code", "--table"])
        .arg(&table)
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["zero_error_verified"], true);
    assert_eq!(v["edges"][0]["classes"], 2);
}
