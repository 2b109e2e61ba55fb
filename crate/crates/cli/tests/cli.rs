//! End-to-end checks of the binary: output formats, exit codes, manifests.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reduction-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn moments_prints_exact_rows() {
    let output = run(&["moments", "--n", "2", "--k", "3", "--s", "4", "--p-max", "1"]);
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    assert!(stdout.contains("p,moment"));
    assert!(stdout.contains("1,48"));
}

#[test]
fn moments_k1_gives_zero_column() {
    let output = run(&["moments", "--n", "4", "--k", "1", "--s", "3", "--p-max", "3"]);
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    for p in 1..=3 {
        assert!(stdout.contains(&format!("{p},0")), "missing zero row for p={p}");
    }
}

#[test]
fn moments_closed_matches_exact() {
    let exact = run(&["moments", "--n", "3", "--k", "4", "--s", "5", "--p-max", "2"]);
    let closed = run(&[
        "moments", "--n", "3", "--k", "4", "--s", "5", "--p-max", "2", "--closed",
    ]);
    assert_eq!(stdout_of(&exact), stdout_of(&closed));
}

#[test]
fn moments_over_cap_exits_2() {
    let output = run(&["moments", "--n", "2", "--k", "3", "--s", "4", "--p-max", "9"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bad_flags_exit_2() {
    let output = run(&["moments", "--n", "2"]);
    assert_eq!(output.status.code(), Some(2));
    let output = run(&["density", "--k", "1.5", "--c", "2"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn density_reports_support_and_boundary() {
    let output = run(&["density", "--k", "3", "--c", "2", "--points", "16"]);
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    assert!(stdout.contains("\"region\": \"F\""));
    assert!(stdout.contains("\"positive_support\": true"));
    assert!(stdout.contains("x,density"));

    // c = c2(3) = 1.5 exactly: Boundary is reported, not fatal
    let output = run(&["density", "--k", "3", "--c", "1.5", "--points", "4"]);
    assert!(output.status.success());
    assert!(stdout_of(&output).contains("\"region\": \"Boundary\""));

    // atom mass 1 - ck^2 = 0.55
    let output = run(&["density", "--k", "3", "--c", "0.05", "--points", "4"]);
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    let json_part = &stdout[..stdout.find("x,density").unwrap()];
    let report: serde_json::Value = serde_json::from_str(json_part.trim()).unwrap();
    assert!((report["atom_mass"].as_f64().unwrap() - 0.55).abs() < 1e-12);
    assert_eq!(report["region"], "A");
}

#[test]
fn thresholds_table_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curves.csv");
    let output = run(&[
        "thresholds",
        "--k-min",
        "2",
        "--k-max",
        "3",
        "--step",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,inv_k2,c1,c0,c2_red,c_ppt");
    // k = 2 row: c_red = c_ppt = 2 + sqrt(3)
    let fields: Vec<&str> = lines[1].split(',').collect();
    let c2: f64 = fields[4].parse().unwrap();
    let ppt: f64 = fields[5].parse().unwrap();
    assert!((c2 - (2.0 + 3.0f64.sqrt())).abs() < 1e-12);
    assert!((ppt - c2).abs() < 1e-12);
    // k = 3 row: c_red = 1.5
    let fields: Vec<&str> = lines[2].split(',').collect();
    let c2: f64 = fields[4].parse().unwrap();
    assert!((c2 - 1.5).abs() < 1e-15);
    assert!(out.with_file_name("curves.csv.manifest.json").exists());
}

#[test]
fn simulate_writes_outputs_and_replay_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("sim");
    let output = run(&[
        "simulate",
        "--n",
        "24",
        "--k",
        "3",
        "--c",
        "2",
        "--trials",
        "2",
        "--seed",
        "9",
        "--bins",
        "8",
        "--compare-density",
        "--out-prefix",
        prefix.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("\"ks_distance\""));

    let eig = dir.path().join("sim-eigenvalues.csv");
    let hist = dir.path().join("sim-histogram.csv");
    let summary = dir.path().join("sim-summary.json");
    let manifest = dir.path().join("sim-eigenvalues.csv.manifest.json");
    for path in [&eig, &hist, &summary, &manifest] {
        assert!(path.exists(), "missing {}", path.display());
    }
    let eig_text = std::fs::read_to_string(&eig).unwrap();
    assert!(eig_text.starts_with("trial,index,eigenvalue,normalization"));
    assert!(eig_text.contains(",over_n"));
    // 2 trials x 72 eigenvalues + header
    assert_eq!(eig_text.lines().count(), 1 + 2 * 72);

    let before: Vec<String> = [&eig, &hist, &summary]
        .iter()
        .map(|p| std::fs::read_to_string(p).unwrap())
        .collect();
    let replay = run(&["replay", "--manifest", manifest.to_str().unwrap()]);
    assert!(replay.status.success());
    let after: Vec<String> = [&eig, &hist, &summary]
        .iter()
        .map(|p| std::fs::read_to_string(p).unwrap())
        .collect();
    assert_eq!(before, after, "replay must reproduce outputs byte-exactly");
}

#[test]
fn simulate_guard_exits_2() {
    let output = run(&[
        "simulate", "--n", "4000", "--k", "5", "--c", "2", "--seed", "1",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn verify_suite_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("verify.json");
    let output = run(&[
        "verify",
        "--suite",
        "combinatorics",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let stdout = stdout_of(&output);
    assert!(stdout.contains("PASS nc_counts_are_catalan"));
    assert!(stdout.contains("0 failed"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["failed"], 0);
    assert!(json["checks"].as_array().unwrap().len() >= 5);

    let unknown = run(&["verify", "--suite", "bogus"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn manifest_is_versioned_and_replayable_for_moments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let output = run(&[
        "moments", "--n", "2", "--k", "2", "--s", "3", "--p-max", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let manifest_path = dir.path().join("m.csv.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["schema"], 1);
    assert_eq!(manifest["subcommand"], "moments");
    assert_eq!(manifest["p_max"], 2);
    assert!(manifest["version"].as_str().is_some());

    let before = std::fs::read_to_string(&out).unwrap();
    assert!(before.contains("2,84"), "E Tr R^2 at (2,2,3) is 84");
    std::fs::remove_file(&out).unwrap();
    let replay = run(&["replay", "--manifest", manifest_path.to_str().unwrap()]);
    assert!(replay.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), before);
}

#[test]
fn thread_cap_env_is_accepted() {
    let output = bin()
        .env("REDUCTION_LAB_THREADS", "1")
        .args(["moments", "--n", "2", "--k", "3", "--s", "4", "--p-max", "1"])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(stdout_of(&output).contains("1,48"));
}

#[test]
fn outputs_are_utf8_and_roundtrippable() {
    let output = run(&["density", "--k", "3", "--c", "2", "--points", "8"]);
    let stdout = stdout_of(&output);
    for line in stdout.lines().skip_while(|l| !l.starts_with("x,")).skip(1) {
        let mut parts = line.split(',');
        let x: f64 = parts.next().unwrap().parse().unwrap();
        let rho: f64 = parts.next().unwrap().parse().unwrap();
        assert!(x.is_finite() && rho >= 0.0);
    }
    assert!(Path::new(env!("CARGO_BIN_EXE_reduction-lab")).exists());
}
