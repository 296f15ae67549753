//! End-to-end checks of the command-line surface: exit codes, byte-stable
//! outputs, and the shared config validation path.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nakasim"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success for {args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> i32 {
    bin()
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn tmp(name: &str) -> PathBuf {
    let dir = tempfile::tempdir().expect("tempdir").keep();
    dir.join(name)
}

/// A scenario file produced by the tool itself.
fn sample_config(dir: &Path) -> PathBuf {
    let out = dir.join("seedrun");
    run_ok(&[
        "simulate",
        "--preset",
        "bitcoin",
        "--n-val",
        "60",
        "--num-blocks",
        "5",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    out.join("effective_config.toml")
}

#[test]
fn replayed_simulation_is_byte_identical() {
    let base = tempfile::tempdir().unwrap().keep();
    let cfg = sample_config(&base);
    let out_a = base.join("a");
    let out_b = base.join("b");
    for out in [&out_a, &out_b] {
        run_ok(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "1234",
            "--verbose",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let a = std::fs::read(out_a.join("summary.csv")).unwrap();
    let b = std::fs::read(out_b.join("summary.csv")).unwrap();
    assert_eq!(a, b, "summary.csv must replay byte-identically");
    let av = std::fs::read(out_a.join("verbose.csv")).unwrap();
    let bv = std::fs::read(out_b.join("verbose.csv")).unwrap();
    assert_eq!(av, bv, "verbose.csv must replay byte-identically");
}

#[test]
fn analyze_reports_the_expected_bound() {
    let out = tmp("analyze");
    run_ok(&[
        "analyze",
        "--rho",
        "0.05",
        "--delta",
        "43.06",
        "--e",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.join("analyze.csv")).unwrap();
    let line = csv.lines().nth(1).unwrap();
    let beta_max: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
    assert!((beta_max - 0.2820).abs() < 5e-4, "beta_max = {beta_max}");
}

#[test]
fn analyze_with_corruption_reports_probability() {
    let out = tmp("analyze2");
    let stdout = run_ok(&[
        "analyze",
        "--rho",
        "0.05",
        "--delta",
        "101.04",
        "--p-star",
        "0.125",
        "--n-val",
        "10",
        "--out",
        out.to_str().unwrap(),
    ])
    .stdout;
    let text = String::from_utf8(stdout).unwrap();
    assert!(text.contains("P = 0.6388") || text.contains("P = 0.6389"), "{text}");
}

#[test]
fn inconsistent_analyze_flags_are_usage_errors() {
    let out = tmp("analyze3");
    let code = exit_code(&[
        "analyze",
        "--rho",
        "0.05",
        "--delta",
        "10",
        "--p-star",
        "0.125",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "--p-star without --n-val must exit 1");
    assert_eq!(exit_code(&["analyze", "--delta", "10"]), 1, "missing --rho");
    assert_eq!(exit_code(&["no-such-command"]), 1);
}

#[test]
fn validation_path_is_shared_between_commands() {
    let base = tempfile::tempdir().unwrap().keep();
    let bad = base.join("bad.toml");
    let good = sample_config(&base);

    // d_out >= n fails validation in both entry points
    let mut text = std::fs::read_to_string(&good).unwrap();
    text = text.replace("n_val = 60", "n_val = 4");
    std::fs::write(&bad, &text).unwrap();
    assert_eq!(
        exit_code(&["validate-config", "--config", bad.to_str().unwrap()]),
        1
    );
    let out = base.join("simfail");
    assert_eq!(
        exit_code(&[
            "simulate",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        1
    );

    // unparsable TOML is also a config error
    std::fs::write(&bad, "n_val = ").unwrap();
    assert_eq!(
        exit_code(&["validate-config", "--config", bad.to_str().unwrap()]),
        1
    );

    assert_eq!(
        exit_code(&["validate-config", "--config", good.to_str().unwrap()]),
        0
    );
}

#[test]
fn table6_emits_all_rows() {
    let out = tmp("table6");
    let stdout = run_ok(&["table6", "--out", out.to_str().unwrap()]).stdout;
    let text = String::from_utf8(stdout).unwrap();
    assert!(text.contains("| bitcoin | none | 0.5000 "));
    assert!(text.contains("| cardano | 5 blocks (100 s) | 0.1602 "));
    let csv = std::fs::read_to_string(out.join("table6.csv")).unwrap();
    assert_eq!(csv.lines().count(), 49, "header + 48 cells");
}

#[test]
fn fig1_reports_the_turnaround() {
    let out = tmp("fig1");
    let stdout = run_ok(&["fig1", "--out", out.to_str().unwrap()]).stdout;
    let text = String::from_utf8(stdout).unwrap();
    let n_star: u64 = text
        .lines()
        .find(|l| l.contains("n* = "))
        .and_then(|l| l.split("n* = ").nth(1))
        .and_then(|l| l.split_whitespace().next())
        .and_then(|v| v.parse().ok())
        .expect("n* in report");
    assert!((10_000..=40_000).contains(&n_star), "n* = {n_star}");
    assert!(out.join("curve.csv").exists());
    assert!(out.join("curve.svg").exists());
}

#[test]
fn sweep_then_fit_recovers_a_slope() {
    let base = tempfile::tempdir().unwrap().keep();
    let out = base.join("sweep");
    run_ok(&[
        "sweep",
        "--preset",
        "monero",
        "--axis",
        "nval",
        "--values",
        "50,100,200",
        "--seeds",
        "1..2",
        "--out",
        out.to_str().unwrap(),
    ]);
    let agg = out.join("aggregate.csv");
    assert!(agg.exists());
    let fit_out = base.join("fit");
    let stdout = run_ok(&[
        "fit",
        "--input",
        agg.to_str().unwrap(),
        "--out",
        fit_out.to_str().unwrap(),
    ])
    .stdout;
    let text = String::from_utf8(stdout).unwrap();
    assert!(text.contains("ln(n)"), "{text}");
    assert!(fit_out.join("fit.csv").exists());
}

#[test]
fn frontier_emits_monotone_bounds() {
    let out = tmp("frontier");
    run_ok(&[
        "frontier",
        "--chains",
        "cardano",
        "--p-stars",
        "0.1",
        "--n-values",
        "10,100,1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out.join("frontier.csv")).unwrap();
    assert!(csv.starts_with("chain,p_star,n_val,delta_max_tolerable_s"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn output_directories_are_never_overwritten() {
    let out = tmp("dup");
    run_ok(&["table6", "--out", out.to_str().unwrap()]);
    let code = exit_code(&["table6", "--out", out.to_str().unwrap()]);
    assert_ne!(code, 0, "re-running into a non-empty directory must fail");
}

#[test]
fn partial_runs_exit_with_code_two() {
    // an adversary stalling every message kind far beyond the cutoff
    let base = tempfile::tempdir().unwrap().keep();
    let cfg_path = sample_config(&base);
    let mut text = std::fs::read_to_string(&cfg_path).unwrap();
    text = text.replace("enabled = false", "enabled = true");
    text = text.replace("p_hat = 0.0", "p_hat = 1.0");
    text = text.replace("p_con = 0.0", "p_con = 1.0");
    text = text.replace("nt_delay_ms = 0", "nt_delay_ms = 40000000000");
    text = text.replace("delay_all_kinds = false", "delay_all_kinds = true");
    let stalled = base.join("stalled.toml");
    std::fs::write(&stalled, &text).unwrap();
    let out = base.join("partial");
    let code = exit_code(&[
        "simulate",
        "--config",
        stalled.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "cutoff runs must exit 2");
}
