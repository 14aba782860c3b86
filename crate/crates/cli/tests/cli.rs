//! Black-box tests of the `trtc` binary: exit codes, output files, and
//! determinism of repeated invocations.

use std::fs;
use std::process::{Command, Output};

fn trtc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trtc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn mask_timing(csv: &str) -> String {
    csv.lines()
        .skip(1)
        .map(|line| &line[..line.rfind(',').unwrap()])
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn selftest_exits_zero() {
    let out = trtc(&["selftest"]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("all checks passed"));
}

#[test]
fn solve_writes_a_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = trtc(&[
        "solve",
        "--trial",
        "1",
        "--set",
        "num_units=4",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("objective"));
    let body = fs::read_to_string(&trace).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,objective_nats,sumrate_bps_hz,backtracks,aux_gain_nats,max_power_ratio,wall_ms"
    );
    assert!(
        lines.count() >= 2,
        "trace should hold one row per iteration"
    );
}

#[test]
fn sweeps_are_reproducible_apart_from_wall_clock() {
    let dir = tempfile::tempdir().unwrap();
    let args = |path: &str| {
        vec![
            "sweep".to_string(),
            "--param".into(),
            "unit_power_dbm".into(),
            "--values".into(),
            "0,10".into(),
            "--trials".into(),
            "2".into(),
            "--scheme".into(),
            "trtc".into(),
            "--set".into(),
            "num_units=4".into(),
            "--out".into(),
            path.to_string(),
        ]
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let argv = args(path.to_str().unwrap());
        let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
        assert!(trtc(&refs).status.success());
    }
    let (a, b) = (
        fs::read_to_string(a).unwrap(),
        fs::read_to_string(b).unwrap(),
    );
    assert_eq!(mask_timing(&a), mask_timing(&b));
    assert!(a.starts_with(
        "sweep_param,value,scheme,trial_count,mean_sumrate_bps_hz,std_sumrate,mean_iters,mean_ms_per_solve"
    ));
}

#[test]
fn invalid_configs_exit_two() {
    assert_eq!(
        trtc(&["solve", "--set", "num_units=0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        trtc(&["sweep", "--param", "bogus", "--values", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        trtc(&["solve", "--set", "frobnicate=1"]).status.code(),
        Some(2)
    );
}

#[test]
fn bench_reports_speedup_on_a_tiny_scenario() {
    let out = trtc(&[
        "bench",
        "--trials",
        "3",
        "--set",
        "num_units=1",
        "--set",
        "max_outer_iters=5",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("speedup"));
}

#[test]
fn config_file_sets_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.toml");
    fs::write(&cfg, "num_units = 4\nrng_seed = 7\n").unwrap();
    let out = trtc(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("seed 7"));
}
