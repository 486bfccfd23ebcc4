use std::path::Path;
use std::process::{Command, Output};

fn ftn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftn-slp")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn check_theory_passes_and_emits_json() {
    let out = ftn(&["check-theory"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(!text.contains("[FAIL]"));
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 6);

    let out = ftn(&["check-theory", "--seed", "11", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v.as_array().unwrap().iter().all(|o| o["passed"] == true));
}

#[test]
fn solve_qp_reads_problem_and_writes_archive() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("qp.json");
    // min (x-1)^2 + (y-2)^2 subject to x + y <= 1
    std::fs::write(&problem, r#"{"q": [[2, 0], [0, 2]], "c": [-2, -4], "g": [[1, 1]], "h": [1]}"#).unwrap();
    let archive = dir.path().join("sol.json");
    for strategy in ["auto", "primal", "dual"] {
        let out = ftn(&[
            "solve-qp",
            "--problem",
            problem.to_str().unwrap(),
            "--out",
            archive.to_str().unwrap(),
            "--strategy",
            strategy,
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        let x: Vec<f64> = serde_json::from_value(v["x"].clone()).unwrap();
        assert!((x[0] - 0.0).abs() < 1e-7 && (x[1] - 1.0).abs() < 1e-7, "{x:?}");
    }
    // the archive is itself a valid problem file
    let out = ftn(&["solve-qp", "--problem", archive.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("base.json");
    std::fs::write(
        &path,
        r#"{
            "subcarriers": 8,
            "users": 2,
            "antennas": 3,
            "n_blocks": 3,
            "n_trials": 2,
            "n_paths": 3,
            "tau_decay": 1e-7,
            "delays": {"kind": "tapped", "spacing": 1e-7},
            "seed": 5
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn custom_sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out_dir = dir.path().join("out");
    let args = [
        "run",
        "--preset",
        "custom",
        "--config",
        cfg.to_str().unwrap(),
        "--sweep",
        "alpha=0.9,1.0",
        "--out",
        out_dir.to_str().unwrap(),
    ];
    let out = ftn(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("run "));

    let mut csvs: Vec<_> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    assert_eq!(csvs.len(), 1);
    let csv_path = csvs.pop().unwrap();
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,K,N,M,R,alpha,beta,gamma_db,precoder,ser,sum_rate_bps,power_w,se_bps_hz,ei_j_per_bit,seed"
    );
    assert_eq!(lines.count(), 4);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(csv_path.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["summaries"].as_array().unwrap().len(), 2);

    // same inputs, same output file contents
    let again = ftn(&args);
    assert!(again.status.success());
    assert_eq!(std::fs::read_to_string(&csv_path).unwrap(), text);
}

#[test]
fn validate_normalizes_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = ftn(&["validate", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["subcarriers"], 8);
    assert_eq!(v["antennas"], 3);
}

#[test]
fn bad_inputs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"users": 5, "antennas": 2}"#).unwrap();
    let out = ftn(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:"));

    let out = ftn(&["run", "--preset", "exp9"]);
    assert_eq!(out.status.code(), Some(2));

    let out = ftn(&["run", "--preset", "custom"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--config"));

    let out = ftn(&["solve-qp", "--problem", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = ftn(&["run", "--preset", "exp3", "--sweep", "alpha=0.9"]);
    assert_eq!(out.status.code(), Some(2));
}
