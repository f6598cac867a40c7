//! End-to-end runs of the `radspec` binary.

use std::process::{Command, Output};

use radspec::cli::{echoed_config, JobConfig};

fn radspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radspec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn spectrum_csv_follows_geometric_law() {
    let out = radspec(&[
        "spectrum", "--space", "BergmanComplex", "--d", "1", "--R", "1", "--symbol", "chi(0,0.5)", "--kmax", "40",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 41);
    for row in rows {
        let k: f64 = row[0].parse().unwrap();
        let log_abs: f64 = row[2].parse().unwrap();
        assert_eq!(row[1], "1");
        assert!((log_abs - (2.0 * k + 2.0) * 0.5f64.ln()).abs() < 1e-9 * log_abs.abs());
        assert_eq!(row[3], "1");
    }
}

#[test]
fn counting_column_is_monotone() {
    let out = radspec(&[
        "counting", "--space", "BergmanHarmonic", "--d", "3", "--R", "1", "--symbol", "chi(0,0.5) - chi(0.1,0.2)",
        "--lambda-min-log10", "-40", "--lambda-max-log10", "-5", "--grid-points", "20",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 20);
    let n: Vec<u64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(n.windows(2).all(|w| w[0] <= w[1]), "{n:?}");
    let lambdas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(lambdas.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn reruns_are_byte_identical_and_echo_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let status = radspec(&[
            "compare", "--space", "BergmanComplex", "--d", "2", "--R", "1", "--symbol", "chi(0,0.5)",
            "--out", path.to_str().unwrap(),
        ])
        .status;
        assert!(status.success());
        outputs.push(std::fs::read_to_string(&path).unwrap());
        std::fs::remove_file(&path).unwrap();
    }
    assert!(outputs[0] == outputs[1], "reruns differ");
    let text = outputs.remove(0);
    let cfg: JobConfig = echoed_config(&text).unwrap();
    let again: JobConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(cfg, again);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["radspec_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["tol"], 1e-10);
    let last = v["result"]["final_ratio"].as_f64().unwrap();
    assert!((last - 1.0).abs() < 0.1, "{last}");
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.toml");
    std::fs::write(
        &path,
        "command = \"spectrum\"\nspace = \"bargmann-complex\"\nd = 1\nsymbol = \"1\"\nkmax = 3\nformat = \"json\"\n",
    )
    .unwrap();
    let out = radspec(&["--config", path.to_str().unwrap(), "--kmax", "6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["entries"].as_array().unwrap().len(), 7);
    assert_eq!(v["result"]["k_max"], 6);
    for e in v["result"]["entries"].as_array().unwrap() {
        assert!(e["log_abs"].as_f64().unwrap().abs() < 1e-10);
    }
}

#[test]
fn exit_codes_name_the_failure() {
    let out = radspec(&["spectrum", "--space", "BergmanComplex", "--d", "1", "--symbol", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("radius"));

    let out = radspec(&["spectrum", "--space", "AgmonHormander", "--d", "2", "--symbol", "exp(-r)", "--kmax", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k = 0"));

    let out = radspec(&[
        "counting", "--space", "BergmanComplex", "--d", "1", "--R", "1", "--symbol", "chi(0,0.9)", "--kmax", "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));

    // The slope checks cannot pass on so short a range.
    let out = radspec(&["counterexample", "--kmax", "20"]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["result"]["checks"].as_array().unwrap().iter().any(|c| c["passed"] == false));
}

#[test]
fn counterexample_report() {
    let out = radspec(&["counterexample", "--p", "2", "--q", "4", "--kmax", "300"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &v["result"];
    assert_eq!(r["experiment"], "counterexample");
    assert!(r["slope_v"]["a"].as_f64().is_some());
    assert!(r["slope_abs"]["a"].as_f64().is_some());
    assert_eq!(r["bound_violations"].as_array().unwrap().len(), 0);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}
