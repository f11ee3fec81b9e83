use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hardy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy")).args(args).output().expect("spawn hardy")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bft_identities_pass_on_interval() {
    let o = hardy(&["verify", "bft", "--i", "1", "--scenario", "interval"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("s,first,second\n"));
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn eig_bottom_respects_hardy_constant() {
    let o = hardy(&["eig", "bottom", "--scenario", "interval", "--weight", "inverse-square-delta", "--N", "4096"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let first = text.lines().nth(1).unwrap();
    let value: f64 = first.split(',').nth(3).unwrap().parse().unwrap();
    assert!(value >= 0.25 - 1e-9, "{value}");
}

#[test]
fn probe_certifies_ball_level_one() {
    let o = hardy(&["probe", "ess", "--scenario", "ball3-j1", "--eta", "0,1,3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let summary = v[0]["summary"].as_array().unwrap();
    assert_eq!(summary.len(), 3);
    assert!(summary.iter().all(|s| s["certified"] == true));
}

#[test]
fn failed_check_exits_two() {
    let o = hardy(&["eig", "count", "--scenario", "interval-delta2", "--threshold", "0.3", "--expect", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&hardy(&["eig", "bottom", "--scenario", "nowhere"])), 1);
    assert_eq!(code(&hardy(&["eig", "bottom", "--frobnicate"])), 1);
    assert_eq!(code(&hardy(&["mesh", "--format", "xml"])), 1);
    assert_eq!(code(&hardy(&[])), 1);
    assert_eq!(code(&hardy(&["--help"])), 0);
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, r#"{"schema": "hardy-run/1", "scenario": "interval-j1", "colour": "red"}"#).unwrap();
    assert_eq!(code(&hardy(&["--config", p.to_str().unwrap(), "mesh"])), 1);
}

#[test]
fn empty_bundle_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardy(&["report", "--bundle-only", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn partial_report_marks_absent_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let o = hardy(&["report", "--run", "A4,A5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["criteria"]["A4"], "pass");
    assert_eq!(v["criteria"]["A5"], "pass");
    assert_eq!(v["criteria"]["A1"], "not-run");
    assert_eq!(v["not_run"], 8);
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn config_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"schema": "hardy-run/1", "scenario": "ball3-j1", "mesh": {"N": 200, "q": 0.7, "eps_min": 1e-6},
            "quasimode": {"eta_grid": [0, 0.5], "windows": null, "tol": 0.02}, "seed": 11}"#,
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = hardy(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
    }
    let (sa, sb) = (snapshot(&a), snapshot(&b));
    assert!(sa.iter().any(|(n, _)| n == "ball3-j1.summary.json"));
    assert!(sa.iter().any(|(n, _)| n.ends_with(".probe.csv")));
    assert_eq!(sa, sb);
}

#[test]
fn seeded_sampling_is_reproducible() {
    let run = |seed: &str| stdout(&hardy(&["verify", "multipolar", "--seed", seed]));
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn out_dir_respects_formats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = hardy(&["xlog", "select-d", "--delta-max", "0.5", "--out", d, "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let names: Vec<String> = snapshot(dir.path()).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, vec!["xlog-select-d.csv".to_string()]);
    let text = fs::read_to_string(dir.path().join("xlog-select-d.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("0.5,3.0585895968"), "{text}");
}

#[test]
fn shipped_config_runs_clean() {
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/ball3-j1.json");
    let dir = tempfile::tempdir().unwrap();
    let o = hardy(&["--config", cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
