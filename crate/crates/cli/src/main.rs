//! `landmark`: synthetic data, fitting, prediction, evaluation and the
//! benchmark experiments from the command line.

mod commands;
mod csvio;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use landmark_core::dataset::Task;
use landmark_core::experiments::bench::Method;
use landmark_core::experiments::synthetic::{
    DEFAULT_DENSITY, DEFAULT_SIGMA_DEPENDENT, DEFAULT_SIGMA_LANDMARK,
};

#[derive(Parser)]
#[command(
    name = "landmark",
    version,
    about = "Landmark output selection for multi-output prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a planted synthetic problem; writes train/test X/Y CSVs and planted.json.
    Synth(SynthArgs),
    /// Fit a landmark model or a baseline and write the model document.
    Fit(FitArgs),
    /// Predict all outputs for new inputs.
    Predict(PredictArgs),
    /// Compare predictions with the truth.
    Eval(EvalArgs),
    /// Cross-validate the landmark model over a penalty grid.
    Cv(CvArgs),
    /// Empirical landmark support recovery versus sample size.
    Recover(RecoverArgs),
    /// Sample-size sweep of the landmark model against the baselines.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GeneratorArgs {
    /// Number of outputs.
    #[arg(long)]
    k: usize,
    /// Number of input features.
    #[arg(long)]
    d: usize,
    /// Number of landmark outputs.
    #[arg(long)]
    s: usize,
    /// Noise on the landmark outputs.
    #[arg(long, default_value_t = DEFAULT_SIGMA_LANDMARK)]
    sigma_landmark: f64,
    /// Noise on the dependent outputs.
    #[arg(long, default_value_t = DEFAULT_SIGMA_DEPENDENT)]
    sigma_dependent: f64,
    /// Fraction of dependent outputs each landmark feeds.
    #[arg(long, default_value_t = DEFAULT_DENSITY)]
    density: f64,
}

#[derive(Args)]
struct SynthArgs {
    /// regression or classification.
    #[arg(long, default_value = "regression")]
    task: Task,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long)]
    n_train: usize,
    #[arg(long)]
    n_test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV (n × d).
    #[arg(long)]
    x: PathBuf,
    /// Output CSV (n × k).
    #[arg(long)]
    y: PathBuf,
    /// regression or classification.
    #[arg(long, default_value = "regression")]
    task: Task,
    /// landmark, one_vs_all, group_lasso or low_rank.
    #[arg(long, default_value = "landmark")]
    method: Method,
    /// Row-sparsity penalty; for a baseline, its single penalty.
    #[arg(long)]
    lambda1: f64,
    /// Entrywise L1 penalty (landmark only).
    #[arg(long, default_value_t = 0.0)]
    lambda2: f64,
    /// Ridge / logistic L2 penalty of the input → landmark models.
    #[arg(long, default_value_t = 1.0)]
    lambda_stage2: f64,
    /// Relative objective change at which the solver stops.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Inputs are the lagged outputs; landmarks are regressed on their own
    /// lagged values only.
    #[arg(long)]
    autoregressive: bool,
    /// Classification: push landmark probabilities, not labels, through Â.
    #[arg(long)]
    propagate_probabilities: bool,
    /// Model document path.
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    x: PathBuf,
    #[arg(long, default_value = "predictions.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// regression (MSE) or classification (Hamming loss and F1).
    #[arg(long, default_value = "regression")]
    task: Task,
    /// Also write the metrics CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value = "regression")]
    task: Task,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Absolute λ₁ values, comma separated. Default: the task's grid of
    /// fractions of the kill level (regression 0.05,0.2; classification
    /// 0.6,0.8,0.9,0.95).
    #[arg(long, value_delimiter = ',')]
    lambda1: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    lambda2: Vec<f64>,
    /// Default: regression 1,10,100,1000; classification 1,10.
    #[arg(long, value_delimiter = ',')]
    lambda_stage2: Vec<f64>,
    /// Per-cell scores CSV.
    #[arg(long, default_value = "cv.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long, default_value_t = 60)]
    k: usize,
    #[arg(long, default_value_t = 6)]
    s: usize,
    #[arg(long, value_delimiter = ',', default_value = "30,60,120,240")]
    n_grid: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Noise on the dependent outputs.
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// λ₁ = scale·√(n·ln k).
    #[arg(long, default_value_t = landmark_core::experiments::recovery::DEFAULT_LAMBDA_SCALE)]
    lambda_scale: f64,
    #[arg(long, default_value = "recovery.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "regression")]
    task: Task,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, value_delimiter = ',', default_value = "30,60,120")]
    n_grid: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    n_test: usize,
    /// Number of seeds per sample size (seeds 0..count, offset by --seed).
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Methods to run, comma separated. Default: every method the task supports.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    /// Results table (method, n, seed, metric, value).
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Fit(a) => commands::fit(a),
        Command::Predict(a) => commands::predict(a),
        Command::Eval(a) => commands::eval(a),
        Command::Cv(a) => commands::cv(a),
        Command::Recover(a) => commands::recover(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("landmark: error: {e}");
            ExitCode::FAILURE
        }
    }
}
