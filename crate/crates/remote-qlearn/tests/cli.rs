//! End-to-end checks of the command-line front end: the exit-code contract
//! (0 success, 2 bad configuration or usage, 3 runtime failure) and the
//! files each subcommand leaves behind.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_remote-qlearn"))
}

fn run_with(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn front end")
}

fn write_config(dir: &std::path::Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).expect("write config");
    path.to_string_lossy().into_owned()
}

#[test]
fn usage_error_exits_2() {
    let out = run_with(&["run"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "missing --config should be a usage error"
    );
    let out = run_with(&["frobnicate"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "unknown subcommand should be a usage error"
    );
}

#[test]
fn unknown_config_key_exits_2_with_message() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = write_config(
        dir.path(),
        "typo.toml",
        "d = 2\nmemory_capacity = 20\nsede = 5\n",
    );
    let out = run_with(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("config error"), "stderr was: {stderr}");
    assert!(
        stderr.contains("sede"),
        "the offending key should be named: {stderr}"
    );
}

#[test]
fn invalid_config_value_exits_2() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = write_config(dir.path(), "bad.toml", "d = 1\nmemory_capacity = 20\n");
    let out = run_with(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
}

#[test]
fn unreadable_input_paths_exit_2() {
    // A bad --config or --input path is a configuration problem of the
    // invocation, reported on the same footing as a bad key or value.
    let out = run_with(&["run", "--config", "/nonexistent/experiment.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
    let dir = tempfile::tempdir().expect("temp dir");
    let out = run_with(&[
        "fit",
        "--input",
        "/nonexistent/survival.csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_3() {
    // A valid configuration whose ensemble is too small to fit fails at run
    // time, not at validation time.
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = write_config(
        dir.path(),
        "tiny.toml",
        "d = 2\nmemory_capacity = 20\nruns = 30\n",
    );
    let out = run_with(&[
        "calibrate",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn run_command_writes_trace_and_summary() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "d = 2\nmemory_capacity = 20\nseed = 42\n",
    );
    let out_dir = dir.path().join("out");
    let out = run_with(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("halted=") && stdout.contains("epsilon_l="),
        "stdout: {stdout}"
    );
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("run_summary.json")).expect("summary"),
    )
    .expect("summary JSON");
    assert_eq!(summary["halted"], serde_json::Value::Bool(true));
    let trace = std::fs::read_to_string(out_dir.join("session_trace.jsonl")).expect("trace");
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(
        lines.len() as u64,
        summary["total_trials"].as_u64().expect("trial count")
    );
    for line in lines {
        serde_json::from_str::<serde_json::Value>(line).expect("well-formed trace record");
    }
}

#[test]
fn sweep_command_writes_per_window_files() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = write_config(
        dir.path(),
        "sweep.toml",
        "d = 2\nmemory_capacity = 30\nseed = 11\nruns = 60\n[sweep]\nmemory_capacities = [30, 40]\n",
    );
    let out_dir = dir.path().join("out");
    let out = run_with(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let window_csv =
        std::fs::read_to_string(out_dir.join("sweep_window.csv")).expect("window summary");
    assert!(window_csv.contains("N_L,n_c,n_bar,n_bar_sim,eps_mean"));
    assert_eq!(
        window_csv.lines().filter(|l| !l.starts_with('#')).count(),
        3
    );
    for n_l in [30, 40] {
        let survival = out_dir.join(format!("survival_window_{n_l}.csv"));
        assert!(
            survival.exists(),
            "missing per-window survival curve {survival:?}"
        );
    }
}

#[test]
fn empty_sweep_grid_exits_2() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = write_config(
        dir.path(),
        "empty.toml",
        "d = 2\nmemory_capacity = 20\nruns = 60\n",
    );
    let out = run_with(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
}

#[test]
fn attack_command_flags_a_reference_tamperer() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = write_config(
        dir.path(),
        "attack.toml",
        "d = 2\nmemory_capacity = 30\nseed = 19\nruns = 60\n\
         [adversary]\nkind = \"ref_tamper\"\nchannel = \"return\"\n",
    );
    let out_dir = dir.path().join("out");
    let out = run_with(&[
        "attack",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("attack_report.json")).expect("report"),
    )
    .expect("report JSON");
    assert_eq!(report["attack_flagged"], serde_json::Value::Bool(true));
    let violations = report["attacked"]["total_alarms"]["m_pm_violations"]
        .as_u64()
        .expect("violation counter");
    assert!(violations > 0, "a return-path tap must trip decoy checks");
    assert!(out_dir.join("attack_survival.csv").exists());
}

#[test]
fn calibrate_then_fit_roundtrip_agrees() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = write_config(
        dir.path(),
        "cal.toml",
        "d = 2\nmemory_capacity = 30\nseed = 23\nruns = 120\n",
    );
    let out_dir = dir.path().join("out");
    let out = run_with(&[
        "calibrate",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let calibration: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("calibration.json")).expect("calibration"),
    )
    .expect("calibration JSON");

    let fit_dir = dir.path().join("fit");
    let survival = out_dir.join("calibration_survival.csv");
    let out = run_with(&[
        "fit",
        "--input",
        survival.to_str().unwrap(),
        "--out",
        fit_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let fit: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(fit_dir.join("fit_report.json")).expect("fit report"),
    )
    .expect("fit JSON");
    let n_c_cal = calibration["report"]["n_c"]
        .as_f64()
        .expect("calibrated n_c");
    let n_c_fit = fit["fit"]["n_c"].as_f64().expect("refit n_c");
    assert!(
        (n_c_cal - n_c_fit).abs() < 1e-9 * n_c_cal.abs(),
        "refitting the written survival curve moved n_c: {n_c_cal} vs {n_c_fit}"
    );
}
