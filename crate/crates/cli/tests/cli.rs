use std::path::Path;
use std::process::Command as Process;

use clap::Parser;
use serde_json::Value;

use tradeoff_core::mnist::{
    IdxTensor, PIXELS, TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS,
};
use tradeoff_core::report::ExperimentReport;
use tradeoff_lab::{run, Cli, Command, Outcome};

fn run_args(args: &[&str]) -> anyhow::Result<Outcome> {
    let mut argv = vec!["tradeoff-lab"];
    argv.extend_from_slice(args);
    run(&Cli::try_parse_from(argv).unwrap())
}

fn out_flag(dir: &Path) -> String {
    dir.display().to_string()
}

fn column(report: &ExperimentReport, name: &str) -> Vec<Value> {
    report.rows.iter().map(|r| r[name].clone()).collect()
}

#[test]
fn defaults_are_parsed() {
    let cli = Cli::try_parse_from(["tradeoff-lab", "verify-thm1"]).unwrap();
    assert_eq!(cli.global.seed, 0);
    match cli.command {
        Command::VerifyThm1(a) => {
            assert_eq!(
                (a.p, a.d, a.eta, a.n, a.trials),
                (0.95, 100, 0.3, 100_000, 50)
            );
        }
        other => panic!("{other:?}"),
    }
    assert!(Cli::try_parse_from(["tradeoff-lab", "--json", "--csv", "transfer"]).is_err());
    assert!(Cli::try_parse_from(["tradeoff-lab", "bogus"]).is_err());
}

#[test]
fn thm1_zero_trials_is_empty_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let status = Process::new(env!("CARGO_BIN_EXE_tradeoff-lab"))
        .args(["--out", &out, "verify-thm1", "--trials", "0"])
        .status()
        .unwrap();
    assert!(status.success());
    let report = ExperimentReport::read_json(dir.path().join("verify-thm1.json")).unwrap();
    assert_eq!(report.schema_version, 1);
    assert!(report.rows.is_empty());
    assert_eq!(report.params["passed"], Value::Bool(true));
}

#[test]
fn thm1_small_runs_pass_and_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let args = [
        "--out",
        &out,
        "--seed",
        "5",
        "verify-thm1",
        "--d",
        "20",
        "--n",
        "8000",
        "--trials",
        "6",
    ];
    let first = run_args(&args).unwrap();
    assert!(first.passed);
    assert_eq!(first.report.rows.len(), 6);
    let bytes = std::fs::read(dir.path().join("verify-thm1.json")).unwrap();
    run_args(&args).unwrap();
    assert_eq!(
        bytes,
        std::fs::read(dir.path().join("verify-thm1.json")).unwrap()
    );

    let csv = std::fs::read_to_string(dir.path().join("verify-thm1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("trial,classifier,standard,robust,bound,tolerance,l2_norm,pass\n"));
}

#[test]
fn thm1_at_half_uses_delta_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let o = run_args(&[
        "--out",
        &out,
        "verify-thm1",
        "--p",
        "0.5",
        "--d",
        "10",
        "--n",
        "8000",
        "--trials",
        "4",
    ])
    .unwrap();
    assert!(o.passed);
    for row in &o.report.rows {
        let std = row["standard"].as_f64().unwrap();
        let bound = row["bound"].as_f64().unwrap();
        assert!((bound - (1.0 - std)).abs() < 1e-12);
    }
}

#[test]
fn format_flags_select_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    run_args(&["--out", &out, "--json", "verify-thm1", "--trials", "0"]).unwrap();
    assert!(dir.path().join("verify-thm1.json").exists());
    assert!(!dir.path().join("verify-thm1.csv").exists());
    run_args(&[
        "--out",
        &out,
        "--csv",
        "transfer",
        "--k",
        "2",
        "--steps",
        "200",
        "--test-size",
        "1000",
    ])
    .unwrap();
    assert!(dir.path().join("transfer.csv").exists());
    assert!(!dir.path().join("transfer.json").exists());
}

#[test]
fn thm2_rejects_weak_signal() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    assert!(run_args(&["--out", &out, "verify-thm2", "--eta", "0.1"]).is_err());
    let status = Process::new(env!("CARGO_BIN_EXE_tradeoff-lab"))
        .args(["--out", &out, "verify-thm2", "--eps", "1.2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn thm2_holds_near_unit_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let o = run_args(&["--out", &out, "verify-thm2", "--eps", "0.99"]).unwrap();
    let params = &o.report.params;
    assert!(o.passed, "{:?}", o.report.rows);
    for key in [
        "robust_model_standard_accuracy",
        "robust_model_robust_accuracy",
    ] {
        assert!((params[key].as_f64().unwrap() - 0.9).abs() <= 0.01);
    }
    let norm = params["standard_model_l2_norm"].as_f64().unwrap();
    assert!((0.99..=1.01).contains(&norm));
}

fn curve_defaults() -> tradeoff_lab::CurveArgs {
    match Cli::try_parse_from(["tradeoff-lab", "tradeoff-curve"])
        .unwrap()
        .command
    {
        Command::TradeoffCurve(a) => a,
        other => panic!("{other:?}"),
    }
}

#[test]
fn tradeoff_curve_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let o = run_args(&[
        "--out",
        &out,
        "tradeoff-curve",
        "--eps-grid",
        "0,0.4,0.8",
        "--steps",
        "20000",
    ])
    .unwrap();
    let std: Vec<f64> = column(&o.report, "standard")
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(std[0] > 0.99, "{std:?}");
    assert!((std[2] - 0.9).abs() <= 0.01, "{std:?}");
    assert!(std.windows(2).all(|w| w[1] <= w[0] + 0.01), "{std:?}");
    let empty = tradeoff_lab::CurveArgs {
        eps_grid: Vec::new(),
        ..curve_defaults()
    };
    assert!(tradeoff_lab::cmd_tradeoff_curve(&empty, 0).is_err());
}

#[test]
fn transfer_report_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let o = run_args(&[
        "--out",
        &out,
        "transfer",
        "--k",
        "2",
        "--eps",
        "0",
        "--steps",
        "2000",
        "--test-size",
        "2000",
    ])
    .unwrap();
    assert_eq!(o.report.rows.len(), 4);
    for row in &o.report.rows {
        assert_eq!(row["error"], row["clean_error"]);
    }
}

fn write_idx(dir: &Path, name: &str, t: &IdxTensor) {
    std::fs::write(dir.join(name), t.to_bytes()).unwrap();
}

/// A tiny 5-vs-7 set: 5s light up the left half, 7s the right half.
fn fake_mnist(dir: &Path) {
    let digits: Vec<u8> = (0..40).map(|i| [5, 7, 1][i % 3]).collect();
    let mut pixels = Vec::with_capacity(digits.len() * PIXELS);
    for (i, &d) in digits.iter().enumerate() {
        for j in 0..PIXELS {
            let left = j % 28 < 14;
            let on = (d == 5 && left) || (d == 7 && !left);
            pixels.push(if on {
                200 + (i % 50) as u8
            } else {
                (i * j % 30) as u8
            });
        }
    }
    let images = IdxTensor::new(vec![digits.len(), 28, 28], pixels).unwrap();
    let labels = IdxTensor::new(vec![digits.len()], digits).unwrap();
    for (img, lab) in [(TRAIN_IMAGES, TRAIN_LABELS), (TEST_IMAGES, TEST_LABELS)] {
        write_idx(dir, img, &images);
        write_idx(dir, lab, &labels);
    }
}

#[test]
fn mnist_modes_on_small_files() {
    let data = tempfile::tempdir().unwrap();
    fake_mnist(data.path());
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let data_dir = data.path().display().to_string();

    let o = run_args(&[
        "--out",
        &out,
        "mnist",
        "--mode",
        "standard",
        "--data-dir",
        &data_dir,
    ])
    .unwrap();
    assert_eq!(
        column(&o.report, "split"),
        vec![Value::from("train"), Value::from("test")]
    );
    assert_eq!(o.report.rows[1]["standard"].as_f64(), Some(1.0));
    for f in [
        "weights-standard.csv",
        "weights-standard.pgm",
        "mnist-standard.json",
        "mnist-standard.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }

    let o = run_args(&[
        "--out",
        &out,
        "mnist",
        "--mode",
        "robust",
        "--data-dir",
        &data_dir,
    ])
    .unwrap();
    assert_eq!(o.report.params["mode"], Value::from("robust"));
    assert!(dir.path().join("weights-robust.pgm").exists());

    let o = run_args(&[
        "--out",
        &out,
        "mnist",
        "--mode",
        "sweep",
        "--data-dir",
        &data_dir,
        "--ks",
        "1,10,784",
    ])
    .unwrap();
    assert_eq!(
        column(&o.report, "k"),
        vec![Value::from(1), Value::from(10), Value::from(784)]
    );
}

#[test]
fn mnist_missing_file_names_the_path() {
    let data = tempfile::tempdir().unwrap();
    fake_mnist(data.path());
    let dir = tempfile::tempdir().unwrap();
    let out = out_flag(dir.path());
    let missing = data.path().join("nope").display().to_string();
    let data_dir = data.path().display().to_string();
    let err = run_args(&[
        "--out",
        &out,
        "mnist",
        "--data-dir",
        &data_dir,
        "--test-labels",
        &missing,
    ])
    .unwrap_err();
    assert!(format!("{err:#}").contains("nope"), "{err:#}");
}
