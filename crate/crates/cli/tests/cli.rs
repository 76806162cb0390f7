use std::path::Path;
use std::process::{Command, Output};

fn levy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_stable_spec(dir: &Path, alpha: f64) -> String {
    let path = dir.join("stable.json");
    let doc = format!(
        r#"{{"name": "stable", "kind": "stable", "d": 3, "params": {{"alpha": {alpha}}}}}"#
    );
    std::fs::write(&path, doc).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn catalog_lists_every_entry() {
    let o = levy(&["catalog"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,kind,d,subordinate_bm,fingerprint"));
    let names: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names.len(), 9);
    assert!(names.contains(&"stable-1") && names.contains(&"relativistic-1-1"));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&levy(&["catalog", "--format", "json", "--d", "5"]))).unwrap();
    assert!(json.as_array().unwrap().iter().all(|d| d["d"] == 5));
}

#[test]
fn psi_of_cauchy_process_from_a_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_stable_spec(dir.path(), 1.0);
    let o = levy(&["psi", "--spec", &spec, "--r", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row[0], 2.0);
    assert!((row[1] - 2.0).abs() < 1e-12 && (row[2] - 2.0).abs() < 1e-12);
}

#[test]
fn wlsc_certificate_schema() {
    let o = levy(&["wlsc", "--spec", "stable-1.5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["beta", "theta", "C", "slack", "verified"] {
        assert!(cert.get(key).is_some(), "{key}");
    }
    assert_eq!(cert["verified"], true);
    assert_eq!(cert["beta"], 1.5);
}

#[test]
fn bracket_csv_columns_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ball.csv");
    let o = levy(&[
        "potential",
        "--spec",
        "stable-2",
        "--r",
        "0.5,1,2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("r_or_x,lower,estimate,upper,violated,method")
    );
    for (line, r) in lines.zip([0.5f64, 1.0, 2.0]) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0].parse::<f64>().unwrap(), r);
        let est: f64 = f[2].parse().unwrap();
        assert!((est / (r * r / 2.0) - 1.0).abs() < 1e-6);
        assert_eq!(f[4], "false");
    }
    for verb in ["kernel", "capacity"] {
        let o = levy(&[verb, "--spec", "relativistic-1-1"]);
        assert_eq!(o.status.code(), Some(0), "{verb}: {}", stderr(&o));
    }
}

#[test]
fn bounds_only_kernel_leaves_estimate_empty() {
    let o = levy(&["kernel", "--spec", "truncated-1", "--r", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let f: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(f[2], "");
    assert_eq!(f[5], "bounds");
}

#[test]
fn verify_single_spec_exits_zero() {
    let o = levy(&["verify", "--spec", "stable-1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = rep["checks"].as_array().unwrap();
    assert!(checks.len() >= 10);
    assert!(checks
        .iter()
        .all(|c| c["violations"] == 0 && c["errored"] == false));
}

#[test]
fn simulate_is_seeded_and_prints_a_chosen_seed() {
    let a = levy(&[
        "simulate", "--spec", "stable-1", "--n", "20", "--seed", "11",
    ]);
    let b = levy(&[
        "simulate", "--spec", "stable-1", "--n", "20", "--seed", "11",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("replica,tau,exit_x1,exit_x2,exit_x3,jumped\n"));
    assert_eq!(text.lines().count(), 21);
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let r: f64 = f[2..5]
            .iter()
            .map(|v| v.parse::<f64>().unwrap().powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(r >= 1.0);
    }
    let c = levy(&["simulate", "--spec", "stable-1", "--n", "5"]);
    assert_eq!(c.status.code(), Some(0));
    assert!(stderr(&c).contains("seed: "));
    let occ = levy(&[
        "simulate",
        "--occupation",
        "--spec",
        "stable-2",
        "--n",
        "50",
        "--seed",
        "1",
        "--dt",
        "1e-3",
    ]);
    assert_eq!(occ.status.code(), Some(0));
    assert!(stdout(&occ).starts_with("cell_index,cx,cy,cz,mass\n"));
}

#[test]
fn experiment_report_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "2"] {
        let out = dir.path().join(format!("report-{threads}.json"));
        let o = levy(&[
            "experiment",
            "jump",
            "--spec",
            "stable-1",
            "--seed",
            "7",
            "--n",
            "2000",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        files.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let rep: serde_json::Value = serde_json::from_slice(&files[0]).unwrap();
    assert_eq!(rep["verdict"], "pass");
    assert!(rep["spec_fingerprint"].as_str().unwrap().len() == 64);
}

#[test]
fn inconclusive_experiment_exits_three() {
    // Too few paths to resolve any difference across the pairs.
    let o = levy(&[
        "experiment",
        "holder",
        "--spec",
        "stable-1",
        "--seed",
        "1",
        "--n",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stdout(&o).contains("\"verdict\": \"inconclusive\""));
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(levy(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(levy(&["psi", "--bogus"]).status.code(), Some(1));
    assert_eq!(levy(&["psi"]).status.code(), Some(1));
    assert_eq!(
        levy(&["psi", "--spec", "no-such-spec"]).status.code(),
        Some(1)
    );
    assert_eq!(
        levy(&["potential", "--spec", "stable-1", "--r", "-1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        levy(&["experiment", "nope", "--spec", "stable-1"])
            .status
            .code(),
        Some(1)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"name": "x", "kind": "stable", "d": 3, "params": {"alpha": 3.0}}"#,
    )
    .unwrap();
    assert_eq!(
        levy(&["psi", "--spec", bad.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(levy(&["--help"]).status.code(), Some(0));
}
