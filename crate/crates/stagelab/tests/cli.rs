//! End-to-end runs of the `stagelab` binary.

use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_stagelab");

fn stagelab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("STAGELAB_TOL").output().expect("spawn stagelab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn network(name: &str) -> String {
    format!("{}/networks/{name}.sn", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn dcqe_csv_table_shape() {
    let o = stagelab(&["run", "--experiment", "dcqe", "--screen", "64", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("signature,rate,normalized_rate"));
    let (mut joint, mut marginal, mut total) = (0, 0, 0.0);
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 3);
        if cols[0].contains('*') {
            marginal += 1;
        } else {
            joint += 1;
            total += cols[1].parse::<f64>().unwrap();
        }
    }
    assert_eq!(joint, 256);
    assert_eq!(marginal, 64 + 4);
    assert!((total - 1.0).abs() <= 1e-12);
}

#[test]
fn stdout_defaults_to_json() {
    let o = stagelab(&["run", "--experiment", "dcqe", "--screen", "4", "--out", "-"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 16);
    assert!((v["total"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn output_file_follows_extension() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("t.json");
    for p in [&csv, &json] {
        let o = stagelab(&["run", "--experiment", "ds", "--screen", "4", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("signature,rate,normalized_rate"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(v["rows"].is_array());
}

#[test]
fn shipped_networks_validate_and_check() {
    for name in ["ds", "dcqe", "wheeler", "walborn"] {
        let path = network(name);
        let o = stagelab(&["validate", "--file", &path]);
        assert!(o.status.success(), "{name}");
        assert_eq!(stdout(&o).lines().last(), Some("valid"));
        let o = stagelab(&["oracle-check", "--file", &path]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn invalid_network_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.sn");
    // the two outputs overlap, so the transition is not an isometry
    std::fs::write(
        &path,
        "stagelab-network v1\n\
         stage 0 { src }\n\
         stage 1 { a, b }\n\
         transition 0 -> 1 {\n  |H> @ src -> |H> @ a;\n  |V> @ src -> 0.6 * |H> @ a + 0.8 * |H> @ b;\n}\n\
         source = |H> @ src;\n",
    )
    .unwrap();
    let o = stagelab(&["validate", "--file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).lines().last(), Some("INVALID"));
    assert!(stdout(&o).contains("semi-unitarity defect 6.000e-1"));
    let o = stagelab(&["run", "--file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = stagelab(&["run", "--file", path.to_str().unwrap(), "--warn-only"]);
    assert!(o.status.success());
}

#[test]
fn exit_codes() {
    assert_eq!(stagelab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(stagelab(&["run", "--experiment", "dcqe", "--set", "nope=1"]).status.code(), Some(1));
    assert_eq!(stagelab(&["run", "--experiment", "dcqe", "--set", "t3=0.9"]).status.code(), Some(2));
    assert_eq!(stagelab(&["run", "--file", "/nonexistent/x.sn"]).status.code(), Some(1));
    assert_eq!(stagelab(&["run", "--file", &network("dcqe"), "--set", "t3=0.6"]).status.code(), Some(2));
    assert_eq!(stagelab(&["--help"]).status.code(), Some(0));
}

#[test]
fn seeded_random_transfer_is_deterministic() {
    let args = ["run", "--experiment", "wheeler", "--transfer", "random", "--seed", "7", "--format", "csv"];
    let a = stagelab(&args);
    let b = stagelab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    other[6] = "8";
    assert_ne!(stagelab(&other).stdout, a.stdout);
}

#[test]
fn single_point_sweep_matches_run() {
    let run = stagelab(&["run", "--experiment", "dcqe", "--screen", "4", "--set", "t3=0.6", "--set", "r3=0.8"]);
    let sweep = stagelab(&[
        "sweep", "--experiment", "dcqe", "--screen", "4", "--param", "t3", "--from", "0.6", "--to", "0.6",
        "--points", "1", "--couple", "r3=sqrt(1-t3^2)", "--out", "-",
    ]);
    assert!(run.status.success() && sweep.status.success(), "{}", String::from_utf8_lossy(&sweep.stderr));
    let run: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    let sweep: serde_json::Value = serde_json::from_slice(&sweep.stdout).unwrap();
    let rows = run["rows"].as_array().unwrap();
    let point = sweep["points"][0]["rows"].as_array().unwrap();
    for r in rows {
        let found = point.iter().find(|p| p["signature"] == r["signature"]).unwrap();
        assert!((found["rate"].as_f64().unwrap() - r["rate"].as_f64().unwrap()).abs() <= 1e-14);
    }
}

#[test]
fn sweep_directory_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = stagelab(&[
        "sweep", "--experiment", "dcqe", "--screen", "4", "--param", "t3", "--from", "0.2", "--to", "0.9",
        "--points", "5", "--couple", "r3=sqrt(1-t3^2)", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..5 {
        assert!(out.join(format!("point_{k:03}.csv")).exists());
    }
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("A1&S+1,") && l.ends_with(",true")));
}

#[test]
fn tolerance_env_var() {
    let tight = Command::new(BIN)
        .args(["oracle-check", "--experiment", "dcqe", "--screen", "4"])
        .env("STAGELAB_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(tight.status.code(), Some(2));
    let bad = Command::new(BIN)
        .args(["oracle-check", "--experiment", "dcqe", "--screen", "4"])
        .env("STAGELAB_TOL", "loose")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn whichpath_reports_phi() {
    let o = stagelab(&["whichpath", "--experiment", "dcqe", "--screen", "4", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("kind,signature,value"));
    let phi: f64 = text.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((phi - 0.5).abs() <= 1e-12);
}

fn sweep_summary(param: &str, couple: &str) -> Vec<(String, bool)> {
    let o = stagelab(&[
        "sweep", "--experiment", "dcqe", "--screen", "8", "--param", param, "--from", "0", "--to", "1",
        "--points", "11", "--couple", couple, "--format", "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[0].to_string(), cols[4] == "true")
        })
        .collect()
}

#[test]
fn t3_sweep_flags_delayed_choice_invariants() {
    for (sig, constant) in sweep_summary("t3", "r3=sqrt(1-t3^2)") {
        let expect = sig.ends_with("S+1") || sig.ends_with("S+4") || sig.ends_with("&*");
        assert_eq!(constant, expect, "{sig}");
    }
}

#[test]
fn r1_sweep_moves_the_middle_outputs() {
    for (sig, constant) in sweep_summary("r1", "t1=sqrt(1-r1^2)") {
        if sig.contains("S+2") || sig.contains("S+3") {
            assert!(!constant, "{sig}");
        }
    }
}
