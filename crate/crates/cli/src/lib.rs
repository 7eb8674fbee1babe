//! Subcommands of `tradeoff-lab`. Each `cmd_*` function runs one experiment
//! and returns its report together with the verdict of any embedded checks.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::json;

use tradeoff_core::distribution::{
    closed_form_robust_accuracy, closed_form_standard_accuracy, LinearClassifier, SyntheticParams,
    ThreatModel,
};
use tradeoff_core::mnist::{
    self, export_weight_grid, load_binary_task, parse_idx, run_binary_mnist, threshold_sweep,
    BinaryMnistOptions, BinaryTask,
};
use tradeoff_core::report::ExperimentReport;
use tradeoff_core::row;
use tradeoff_core::streams;
use tradeoff_core::theory::{
    accuracies_from_confusion, estimate_confusion, tradeoff_bound, verify_tradeoff, CONFUSION_CELLS,
};
use tradeoff_core::training::{
    run_theorem2, train, transfer_experiment, L1Update, TrainConfig, TrainingData, TransferAttack,
    TransferOptions, SVM_STEPS,
};

#[derive(Debug, Parser)]
#[command(
    name = "tradeoff-lab",
    version,
    about = "Robustness/accuracy trade-off experiments on linear classifiers"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Root seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for reports and artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Write only the JSON report.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Write only the CSV mirror.
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the robust-accuracy bound on random and trained classifiers.
    VerifyThm1(Thm1Args),
    /// Train and certify the standard/robust SVM pair.
    VerifyThm2(Thm2Args),
    /// Sweep the adversarial-training budget and record both accuracies.
    TradeoffCurve(CurveArgs),
    /// Transfer matrix of adversarial examples between standard classifiers.
    Transfer(TransferArgs),
    /// Binary 5-vs-7 MNIST experiments.
    Mnist(MnistArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    #[arg(long, default_value_t = 0.9)]
    pub p: f64,
    #[arg(long, default_value_t = 100)]
    pub d: usize,
    #[arg(long, default_value_t = 0.4)]
    pub eta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Thm1Args {
    #[arg(long, default_value_t = 0.95)]
    pub p: f64,
    #[arg(long, default_value_t = 100)]
    pub d: usize,
    #[arg(long, default_value_t = 0.3)]
    pub eta: f64,
    /// Samples per confusion estimate (split over four cells).
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args)]
pub struct Thm2Args {
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, default_value_t = 0.8)]
    pub eps: f64,
    /// Training steps per run (batches of 64 fresh samples).
    #[arg(long, default_value_t = SVM_STEPS)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8])]
    pub eps_grid: Vec<f64>,
    #[arg(long, default_value_t = SVM_STEPS)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackArg {
    FeatureShift,
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct TransferArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, default_value_t = 0.8)]
    pub eps: f64,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Ridge weight of the standard SVMs.
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    #[arg(long, default_value_t = SVM_STEPS)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = AttackArg::FeatureShift)]
    pub attack: AttackArg,
    #[arg(long, default_value_t = 10_000)]
    pub test_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MnistMode {
    Standard,
    Robust,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum L1Arg {
    Subgradient,
    Proximal,
}

#[derive(Debug, Clone, Args)]
pub struct MnistArgs {
    #[arg(long, value_enum, default_value_t = MnistMode::Standard)]
    pub mode: MnistMode,
    /// Directory holding the four uncompressed IDX files under their
    /// standard names; individual paths override it.
    #[arg(long, default_value = "data/mnist")]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub train_images: Option<PathBuf>,
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    #[arg(long)]
    pub test_images: Option<PathBuf>,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 20, 50, 100, 200, 400, 784])]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Update rule for the ℓ₁ part of the robust margin.
    #[arg(long, value_enum, default_value_t = L1Arg::Proximal)]
    pub l1_update: L1Arg,
}

/// A finished experiment.
#[derive(Debug)]
pub struct Outcome {
    pub report: ExperimentReport,
    /// False when an embedded assertion failed.
    pub passed: bool,
    /// Files written besides the report.
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    fn new(report: ExperimentReport, passed: bool) -> Self {
        Self {
            report,
            passed,
            artifacts: Vec::new(),
        }
    }
}

fn synthetic(p: f64, d: usize, eta: f64, seed: u64) -> Result<SyntheticParams<f64>> {
    Ok(SyntheticParams::new(p, d, eta, seed)?)
}

/// Random Gaussian weights for even trials, short SVM runs (standard or at
/// ε = 2η) for odd trials. All classifiers are bias-free.
fn thm1_classifier(
    i: usize,
    params: &SyntheticParams<f64>,
    seed: u64,
) -> Result<(String, LinearClassifier<f64>)> {
    let stream = streams::classifier(i);
    if i.is_multiple_of(2) {
        let mut rng = streams::stream_rng(seed, stream);
        let dim = params.feature_dim();
        let scale: f64 = rng.random_range(0.0..3.0);
        let weights = (0..dim)
            .map(|j| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                if j == 0 {
                    scale * z
                } else {
                    z / (dim as f64).sqrt()
                }
            })
            .collect();
        return Ok(("random".into(), LinearClassifier::from_weights(weights)?));
    }
    let eps = if i % 4 == 1 { 0.0 } else { 2.0 * params.eta() };
    let config = TrainConfig {
        steps: 2_000,
        stream_id: stream,
        ..TrainConfig::synthetic_svm(1e-2, seed).robust(eps)
    };
    let w = train(&config, TrainingData::Sampler(params))?;
    let kind = if eps == 0.0 { "svm" } else { "robust_svm" };
    Ok((kind.into(), w))
}

pub fn cmd_verify_thm1(args: &Thm1Args, seed: u64) -> Result<Outcome> {
    let params = synthetic(args.p, args.d, args.eta, seed)?;
    tradeoff_bound(args.p, 0.0)?;
    let mut report = ExperimentReport::new("verify-thm1", seed)
        .param("p", args.p)?
        .param("d", args.d)?
        .param("eta", args.eta)?
        .param("n", args.n)?
        .param("trials", args.trials)?
        .param("tolerance", "3 binomial standard errors")?;
    let per_cell = args.n / CONFUSION_CELLS;
    let mut passed = true;
    for i in 0..args.trials {
        let (kind, w) = thm1_classifier(i, &params, seed)?;
        let cp = estimate_confusion(&w, &params, args.n, streams::TEST)?;
        let acc = accuracies_from_confusion(&cp, args.p);
        let delta = (1.0 - acc.standard).clamp(0.0, 1.0);
        let bound = tradeoff_bound(args.p, delta)?;
        // robust − k·(1 − standard) with k = p/(1−p), linear in the cells.
        let [s_pp, s_pm, s_mp, s_mm] = cp.stderr(per_cell);
        let k = args.p / (1.0 - args.p);
        let q = 1.0 - args.p;
        let ca = 0.5 * q - 0.5 * k * args.p;
        let cb = 0.5 * args.p - 0.5 * k * q;
        let se = ((ca * ca) * (s_pp * s_pp + s_mm * s_mm)
            + (cb * cb) * (s_mp * s_mp + s_pm * s_pm))
            .sqrt();
        // The floor absorbs rounding where the combination vanishes (p = ½).
        let tol = 3.0 * se + 1e-12;
        let ok = verify_tradeoff(&cp, args.p, tol)?;
        passed &= ok;
        report.push_row(row!(
            "trial" => i,
            "classifier" => kind,
            "standard" => acc.standard,
            "robust" => acc.robust,
            "bound" => bound,
            "tolerance" => tol,
            "l2_norm" => w.l2_norm(),
            "pass" => ok,
        ))?;
    }
    Ok(Outcome::new(report, passed))
}

pub fn cmd_verify_thm2(args: &Thm2Args, seed: u64) -> Result<Outcome> {
    let DistArgs { p, d, eta } = args.dist;
    let params = synthetic(p, d, eta, seed)?;
    let run = run_theorem2(&params, args.eps, seed, args.steps)?;
    let cert = &run.certificate;
    let mut report = ExperimentReport::new("verify-thm2", seed)
        .param("p", p)?
        .param("d", d)?
        .param("eta", eta)?
        .param("eps", args.eps)?
        .param("steps", args.steps)?
        .param("batch_size", 64)?
        .param("tol", cert.tol)?
        .param("lambda", run.standard.lambda)?
        .param("lambda_probes", &run.standard.probes)?
        .param("standard_model_l2_norm", cert.standard_norm)?
        .param("robust_model_l2_norm", cert.robust_norm)?
        .param(
            "standard_model_standard_accuracy",
            cert.standard_model.standard,
        )?
        .param("standard_model_robust_accuracy", cert.standard_model.robust)?
        .param("robust_model_standard_accuracy", cert.robust_model.standard)?
        .param("robust_model_robust_accuracy", cert.robust_model.robust)?;
    for c in &cert.checks {
        report.push_row(row!(
            "check" => c.name,
            "value" => c.value,
            "threshold" => c.threshold,
            "pass" => c.passed,
        ))?;
    }
    Ok(Outcome::new(report, cert.all_pass()))
}

pub fn cmd_tradeoff_curve(args: &CurveArgs, seed: u64) -> Result<Outcome> {
    let DistArgs { p, d, eta } = args.dist;
    if args.eps_grid.is_empty() {
        bail!("eps grid must not be empty");
    }
    let params = synthetic(p, d, eta, seed)?;
    let mut report = ExperimentReport::new("tradeoff-curve", seed)
        .param("p", p)?
        .param("d", d)?
        .param("eta", eta)?
        .param("eps_grid", &args.eps_grid)?
        .param("steps", args.steps)?
        .param("training", "hinge on the unit sphere, no ridge term")?;
    for &eps in &args.eps_grid {
        let config = TrainConfig {
            steps: args.steps,
            ..TrainConfig::synthetic_svm_unit_sphere(eps, seed)
        };
        let w = train(&config, TrainingData::Sampler(&params))?;
        let tm = ThreatModel::linf(eps)?;
        report.push_row(row!(
            "eps" => eps,
            "standard" => closed_form_standard_accuracy(&w, &params)?,
            "robust" => closed_form_robust_accuracy(&w, &params, &tm)?,
            "l2_norm" => w.l2_norm(),
            "l1_norm" => w.l1_norm(),
        ))?;
    }
    Ok(Outcome::new(report, true))
}

pub fn cmd_transfer(args: &TransferArgs, seed: u64) -> Result<Outcome> {
    let DistArgs { p, d, eta } = args.dist;
    let params = synthetic(p, d, eta, seed)?;
    let config = TrainConfig {
        steps: args.steps,
        ..TrainConfig::synthetic_svm(args.lambda, seed)
    };
    let options = TransferOptions {
        attack: match args.attack {
            AttackArg::FeatureShift => TransferAttack::FeatureShift,
            AttackArg::Exact => TransferAttack::PerClassifierExact,
        },
        test_size: args.test_size,
        ..TransferOptions::default()
    };
    let result = transfer_experiment(&params, args.k, &config, args.eps, &options)?;
    let mut report = ExperimentReport::new("transfer", seed)
        .param("p", p)?
        .param("d", d)?
        .param("eta", eta)?
        .param("eps", args.eps)?
        .param("k", args.k)?
        .param("lambda", args.lambda)?
        .param("steps", args.steps)?
        .param("attack", format!("{:?}", options.attack))?
        .param("test_size", args.test_size)?
        .param(
            "l2_norms",
            result
                .classifiers
                .iter()
                .map(|w| w.l2_norm())
                .collect::<Vec<_>>(),
        )?;
    for (i, row) in result.error.iter().enumerate() {
        for (j, &err) in row.iter().enumerate() {
            report.push_row(row!(
                "source" => i,
                "target" => j,
                "error" => err,
                "clean_error" => result.clean_error[j],
            ))?;
        }
    }
    Ok(Outcome::new(report, true))
}

fn load_task(args: &MnistArgs) -> Result<BinaryTask<f64>> {
    let explicit = [
        &args.train_images,
        &args.train_labels,
        &args.test_images,
        &args.test_labels,
    ];
    if explicit.iter().all(|p| p.is_none()) {
        return load_binary_task(&args.data_dir)
            .with_context(|| format!("loading MNIST from {}", args.data_dir.display()));
    }
    let pick = |given: &Option<PathBuf>, name: &str| {
        given.clone().unwrap_or_else(|| args.data_dir.join(name))
    };
    let read =
        |path: PathBuf| parse_idx(&path).with_context(|| format!("reading {}", path.display()));
    Ok(mnist::build_binary_task(
        &read(pick(&args.train_images, mnist::TRAIN_IMAGES))?,
        &read(pick(&args.train_labels, mnist::TRAIN_LABELS))?,
        &read(pick(&args.test_images, mnist::TEST_IMAGES))?,
        &read(pick(&args.test_labels, mnist::TEST_LABELS))?,
    )?)
}

pub fn cmd_mnist(args: &MnistArgs, seed: u64, out_dir: &Path) -> Result<Outcome> {
    let task = load_task(args)?;
    let mut options = BinaryMnistOptions::new(seed);
    options.epsilon = args.eps;
    options.config.learning_rate = args.learning_rate;
    options.config.steps = args.epochs;
    options.config.l1_update = match args.l1_update {
        L1Arg::Subgradient => L1Update::Subgradient,
        L1Arg::Proximal => L1Update::Proximal,
    };
    let mode = match args.mode {
        MnistMode::Standard => "standard",
        MnistMode::Robust => "robust",
        MnistMode::Sweep => "sweep",
    };
    let report = ExperimentReport::new(format!("mnist-{mode}"), seed)
        .param("mode", mode)?
        .param("positive_digit", task.positive_digit)?
        .param("negative_digit", task.negative_digit)?
        .param("train_size", task.train.len())?
        .param("test_size", task.test.len())?
        .param("eps", args.eps)?
        .param("loss", "logistic")?
        .param("optimizer", "full-batch gradient descent")?
        .param("learning_rate", args.learning_rate)?
        .param("epochs", args.epochs)?
        .param("l1_update", format!("{:?}", options.config.l1_update))?;

    if args.mode == MnistMode::Sweep {
        let mut report = report.param("ks", &args.ks)?;
        let config = TrainConfig {
            robust_epsilon: 0.0,
            ..options.config.clone()
        };
        for r in threshold_sweep(&task, &args.ks, &config, args.eps)? {
            report.push_row(row!(
                "k" => r.k,
                "standard" => r.standard_accuracy,
                "robust" => r.robust_accuracy,
            ))?;
        }
        return Ok(Outcome::new(report, true));
    }

    let robust = args.mode == MnistMode::Robust;
    let (w, m) = run_binary_mnist(&task, robust, &options)?;
    let mut report = report.param("bias", w.bias())?;
    for (split, standard, adv, adv_open) in [
        (
            "train",
            m.train_standard,
            m.train_adversarial,
            m.train_adversarial_unboxed,
        ),
        (
            "test",
            m.test_standard,
            m.test_adversarial,
            m.test_adversarial_unboxed,
        ),
    ] {
        report.push_row(row!(
            "split" => split,
            "standard" => standard,
            "adversarial" => adv,
            "adversarial_unboxed" => adv_open,
            "l1_norm" => m.l1_norm,
        ))?;
    }
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let files = export_weight_grid(&w, out_dir.join(format!("weights-{mode}")))?;
    let mut outcome = Outcome::new(report, true);
    outcome.artifacts = vec![files.csv, files.pgm];
    Ok(outcome)
}

/// Runs the parsed command line and writes its report files.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let seed = cli.global.seed;
    let out = &cli.global.out;
    let mut outcome = match &cli.command {
        Command::VerifyThm1(a) => cmd_verify_thm1(a, seed)?,
        Command::VerifyThm2(a) => cmd_verify_thm2(a, seed)?,
        Command::TradeoffCurve(a) => cmd_tradeoff_curve(a, seed)?,
        Command::Transfer(a) => cmd_transfer(a, seed)?,
        Command::Mnist(a) => cmd_mnist(a, seed, out)?,
    };
    outcome.report = outcome.report.param("passed", outcome.passed)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let stem = out.join(&outcome.report.experiment);
    if !cli.global.csv {
        let path = stem.with_extension("json");
        outcome.report.write_json(&path)?;
        outcome.artifacts.push(path);
    }
    if !cli.global.json {
        let path = stem.with_extension("csv");
        outcome.report.write_csv(&path)?;
        outcome.artifacts.push(path);
    }
    Ok(outcome)
}

/// One-line human summary of a finished run.
pub fn summary(outcome: &Outcome) -> String {
    let verdict = if outcome.passed { "ok" } else { "FAILED" };
    let files: Vec<String> = outcome
        .artifacts
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    format!(
        "{}: {} rows, {verdict}; wrote {}",
        outcome.report.experiment,
        outcome.report.rows.len(),
        json!(files)
    )
}
