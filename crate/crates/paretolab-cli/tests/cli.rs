//! End-to-end runs of the installed binary: exit codes, output formats,
//! determinism, and agreement between subcommands.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use paretolab::io::{read_grid_csv, read_samples_csv, read_steps_csv, read_sweep_csv};

const ALPHA: f64 = 2.1240089104948296;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_paretolab"));
    // Isolate from whatever the invoking shell exports.
    cmd.env_remove("PARETOLAB_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn json_value(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout_str(out)).expect("stdout is one JSON document")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn exponent_json_reports_closed_form() {
    let out = run(&["exponent", "--p", "0.6", "--gamma", "0.5", "--kappa", "1.2", "--json"]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_str(&out));
    let v = json_value(&out);
    for key in ["p", "gamma", "kappa", "lambda", "a", "b", "x1", "x2", "rho0", "rho1", "alpha"] {
        assert!(v.get(key).is_some(), "missing key {key}");
    }
    let alpha = v["alpha"].as_f64().unwrap();
    assert!((alpha - ALPHA).abs() <= 1e-12, "alpha = {alpha}");
    assert_eq!(v["rho0"].as_f64().unwrap(), -alpha);
}

#[test]
fn exponent_text_is_aligned_and_matches_json() {
    let out = run(&["exponent", "--p", "0.6", "--gamma", "0.5", "--kappa", "1.2"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_str(&out);
    assert_eq!(text.lines().count(), 11);
    let alpha_line = text.lines().find(|l| l.starts_with("alpha")).unwrap();
    let alpha: f64 = alpha_line.split_whitespace().last().unwrap().parse().unwrap();

    let json = run(&["exponent", "--p", "0.6", "--gamma", "0.5", "--kappa", "1.2", "--json"]);
    let from_json = json_value(&json)["alpha"].as_f64().unwrap();
    assert_eq!(alpha.to_bits(), from_json.to_bits());
}

#[test]
fn exponent_pins_alpha_at_critical_kappa() {
    let out = run(&["exponent", "--p", "0.7", "--gamma", "0.3", "--kappa", "1"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_str(&out);
    let alpha_line = text.lines().find(|l| l.starts_with("alpha")).unwrap();
    assert_eq!(alpha_line.split_whitespace().last().unwrap(), "1.0000000000000000e0");
}

#[test]
fn exponent_rejects_out_of_range_p() {
    let out = run(&["exponent", "--p", "1.2", "--gamma", "0.5", "--kappa", "1.2"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("p out of range (0,1)"));
}

#[test]
fn exponent_degenerate_point_is_a_numerical_failure() {
    let out = run(&["exponent", "--p", "0.5", "--gamma", "0.5", "--kappa", "1"]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr_str(&out).contains("degenerate discriminant"));
}

#[test]
fn sweep_csv_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "--p", "0.6", "--gamma", "0.5", "--kappa", "1.2",
        "--vary", "kappa", "--from", "1", "--to", "2", "--steps", "11",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_str(&out));

    let bytes = fs::read(&path).unwrap();
    let rows = read_sweep_csv(&bytes[..]).unwrap();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0].value, 1.0);
    assert_eq!(rows[0].alpha, 1.0);
    assert_eq!(rows[10].value, 2.0);

    // Re-serializing the parsed rows reproduces the file byte for byte.
    let mut rewritten = Vec::new();
    paretolab::io::write_sweep_csv(&mut rewritten, &rows).unwrap();
    assert_eq!(bytes, rewritten);
}

#[test]
fn solve_emits_grid_and_residual_report() {
    let dir = tempfile::tempdir().unwrap();
    let grid_path = dir.path().join("grid.csv");
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "solve", "--p", "0.6", "--gamma", "0.5", "--kappa", "1.2",
        "--m", "4", "--x-min", "1", "--x-max", "1e4",
        "--grid-out", grid_path.to_str().unwrap(),
        "--report-out", report_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_str(&out));

    let rows = read_grid_csv(fs::read(&grid_path).unwrap().as_slice()).unwrap();
    assert!(rows.len() > 50);
    assert!(rows.iter().all(|(x, f)| *x > 0.0 && *f > 0.0));
    // Cells descend as x^rho0.
    assert!(rows[0].1 > rows[rows.len() - 1].1);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["cells"].as_u64().unwrap() as usize, rows.len());
    assert!(report["residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn solve_rejects_wrong_modulation_length() {
    let out = run(&[
        "solve", "--p", "0.6", "--gamma", "0.5", "--kappa", "1.2",
        "--m", "4", "--modulation", "1.0,2.0", "--grid-out", "/dev/null",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("modulation"));
}

#[test]
fn stability_auto_threshold_reports_geometric_decay() {
    let dir = tempfile::tempdir().unwrap();
    let trace_path = dir.path().join("steps.csv");
    let out = run(&[
        "stability", "--p", "0.6", "--gamma", "0.5", "--kappa", "1.2",
        "--xc", "auto", "--steps", "40", "--x-max", "1e6",
        "--trace-out", trace_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_str(&out));
    let text = stdout_str(&out);
    assert!(text.contains("geometric, rate=0.8333"), "{text}");

    let rows = read_steps_csv(fs::read(&trace_path).unwrap().as_slice()).unwrap();
    assert_eq!(rows.len(), 41);
    assert_eq!(rows[0].0, 0);
    assert!(rows[0].2.is_none());
    for (_, _, ratio) in &rows[1..] {
        let r = ratio.expect("positive distances all the way down");
        assert!((r - 1.0 / 1.2).abs() <= 1e-9, "ratio {r}");
    }
}

#[test]
fn stability_refuses_critical_kappa_without_flag() {
    let out = run(&[
        "stability", "--p", "0.6", "--gamma", "0.5", "--kappa", "1",
        "--xc", "auto", "--steps", "10", "--x-max", "1e6",
    ]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr_str(&out).contains("not dissipative"));

    let out = run(&[
        "stability", "--p", "0.6", "--gamma", "0.5", "--kappa", "1",
        "--xc", "auto", "--steps", "10", "--x-max", "1e6", "--allow-critical",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_str(&out));
}

#[test]
fn mc_critical_kappa_has_no_stationary_tail() {
    let out = run(&[
        "mc", "--p", "0.7", "--gamma", "0.3", "--kappa", "1",
        "--agents", "100", "--steps", "10", "--hill-k", "10",
    ]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr_str(&out).contains("stationary tail unavailable at kappa=1"));
}

#[test]
fn mc_needs_parameters_or_config() {
    let out = run(&["mc", "--agents", "100", "--steps", "10"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("--config"));

    // clap rejects mixing the two parameter sources outright.
    let out = run(&[
        "mc", "--config", "/tmp/whatever.json", "--p", "0.6",
        "--agents", "100", "--steps", "10",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn mc_output_is_deterministic_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let mc_args = |samples: &Path, report: &Path| {
        vec![
            "mc".to_string(), "--p".into(), "0.6".into(), "--gamma".into(), "0.5".into(),
            "--kappa".into(), "1.2".into(), "--agents".into(), "2000".into(),
            "--steps".into(), "50".into(), "--burn-in".into(), "25".into(),
            "--seed".into(), "9".into(), "--hill-k".into(), "20".into(),
            "--samples-out".into(), samples.to_str().unwrap().into(),
            "--report-out".into(), report.to_str().unwrap().into(),
        ]
    };

    let mut outputs = Vec::new();
    for (threads, tag) in [("1", "a"), ("4", "b"), ("4", "c")] {
        let samples = dir.path().join(format!("samples_{tag}.csv"));
        let report = dir.path().join(format!("report_{tag}.json"));
        let out = bin()
            .args(mc_args(&samples, &report))
            .env("PARETOLAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0, "{}", stderr_str(&out));
        outputs.push((fs::read(&samples).unwrap(), fs::read(&report).unwrap()));
    }
    // One worker vs four; and four vs four again: identical bytes.
    assert_eq!(outputs[0], outputs[1], "thread count leaked into output");
    assert_eq!(outputs[1], outputs[2], "rerun differed");

    let samples = read_samples_csv(outputs[0].0.as_slice()).unwrap();
    assert_eq!(samples.len(), 2000);
    assert!(samples.iter().all(|w| *w > 0.0));
}

#[test]
fn threads_env_must_be_a_positive_integer() {
    for bad in ["abc", "0", "-2"] {
        let out = bin()
            .args(["exponent", "--p", "0.6", "--gamma", "0.5", "--kappa", "1.2"])
            .env("PARETOLAB_THREADS", bad)
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 2, "PARETOLAB_THREADS={bad}");
        assert!(stderr_str(&out).contains("PARETOLAB_THREADS"));
    }
}

#[test]
fn multiclass_single_class_matches_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("mix.json");
    fs::write(
        &config,
        r#"{"kappa": 1.2, "classes": [{"p": 0.6, "q": 0.4, "gamma": 0.5}]}"#,
    )
    .unwrap();
    let out = run(&["multiclass", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{}", stderr_str(&out));
    let v = json_value(&out);
    assert_eq!(v["classes"].as_u64(), Some(1));
    assert!(v["residual"].as_f64().unwrap() <= 1e-12);
    let alpha_mix = v["alpha"].as_f64().unwrap();

    let exp = run(&["exponent", "--p", "0.6", "--gamma", "0.5", "--kappa", "1.2", "--json"]);
    let alpha_exp = json_value(&exp)["alpha"].as_f64().unwrap();
    assert!(
        (alpha_mix - alpha_exp).abs() <= 1e-10,
        "multiclass {alpha_mix} vs exponent {alpha_exp}"
    );
}

#[test]
fn multiclass_reports_unreadable_config() {
    let out = run(&["multiclass", "--config", "/nonexistent/mix.json"]);
    assert_eq!(exit_code(&out), 2);

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("mix.json");
    fs::write(&config, "{not json").unwrap();
    let out = run(&["multiclass", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("parse error"));
}
