//! Landmark model versus baselines on the same data, each tuned by
//! cross-validation over a grid of comparable size.

use serde::{Deserialize, Serialize};

use crate::baselines::{fit_group_lasso, fit_low_rank, fit_one_vs_all};
use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::landmark::{fit, FitOptions};
use crate::matrix::{spectral_norm_sq, t_matmul, Matrix};
use crate::solver::{kill_lambda, SolverConfig};

use super::cv::{cross_validate_by, cross_validate_with, landmark_grid, GridCell, Metric};
use super::metrics::MetricsReport;
use super::synthetic::{gen_synthetic_classification, gen_synthetic_regression, SyntheticSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Landmark,
    OneVsAll,
    GroupLasso,
    LowRank,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Landmark => "landmark",
            Method::OneVsAll => "one_vs_all",
            Method::GroupLasso => "group_lasso",
            Method::LowRank => "low_rank",
        }
    }

    pub fn supports(&self, task: Task) -> bool {
        matches!(self, Method::Landmark | Method::OneVsAll) || task == Task::Regression
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "landmark" => Ok(Method::Landmark),
            "one_vs_all" => Ok(Method::OneVsAll),
            "group_lasso" => Ok(Method::GroupLasso),
            "low_rank" => Ok(Method::LowRank),
            other => Err(Error::InvalidConfig(format!(
                "unknown method {other:?} (expected landmark, one_vs_all, group_lasso or low_rank)"
            ))),
        }
    }
}

/// Methods from the comparison literature that are not provided.
pub const NOT_IMPLEMENTED: [&str; 2] = ["mlcs", "ml-cca"];

/// Hyperparameter grids. Sparse-penalty grids are fractions of the data's
/// kill level, so they adapt to scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub folds: usize,
    pub landmark_lambda1_fractions: Vec<f64>,
    pub landmark_lambda2: Vec<f64>,
    pub stage2_lambdas: Vec<f64>,
    pub ridge_lambdas: Vec<f64>,
    pub group_lasso_fractions: Vec<f64>,
    pub low_rank_fractions: Vec<f64>,
    pub solver: SolverConfig,
    /// Inputs are the lagged outputs; the landmark model then regresses
    /// landmarks on their own lagged values.
    #[serde(default)]
    pub autoregressive: bool,
}

impl Tuning {
    /// Default grids for `task`. On binary labels the kill level sits far
    /// above the useful range of `λ₁`, so classification searches close to it.
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Regression => Tuning::default(),
            Task::Classification => Tuning {
                landmark_lambda1_fractions: vec![0.6, 0.8, 0.9, 0.95],
                stage2_lambdas: vec![1.0, 10.0],
                ..Tuning::default()
            },
        }
    }
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning {
            folds: 3,
            landmark_lambda1_fractions: vec![0.05, 0.2],
            landmark_lambda2: vec![0.0],
            stage2_lambdas: vec![1.0, 10.0, 100.0, 1000.0],
            ridge_lambdas: vec![0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0, 100000.0, 1000000.0],
            group_lasso_fractions: vec![0.01, 0.03, 0.1, 0.3, 0.5, 0.7, 0.85, 0.95],
            low_rank_fractions: vec![0.01, 0.03, 0.1, 0.3, 0.5, 0.7, 0.85, 0.95],
            solver: SolverConfig {
                tol: 1e-6,
                ..SolverConfig::default()
            },
            autoregressive: false,
        }
    }
}

/// Tunes `method` on `train` and reports its test metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub method: Method,
    pub report: MetricsReport,
    /// The selected hyperparameters, method specific.
    pub chosen: Vec<f64>,
}

fn centered(dataset: &Dataset) -> (Matrix, Matrix) {
    (
        dataset.x.center_columns(&dataset.x.column_means()),
        dataset.y.center_columns(&dataset.y.column_means()),
    )
}

/// Smallest trace penalty giving `B = 0`: `‖2XᵀY‖₂`.
pub fn trace_kill_lambda(x: &Matrix, y: &Matrix) -> Result<f64> {
    Ok(2.0 * spectral_norm_sq(&t_matmul(x, y)?).sqrt())
}

pub fn tune_and_evaluate(
    method: Method,
    train: &Dataset,
    test: &Dataset,
    tuning: &Tuning,
    seed: u64,
) -> Result<Evaluation> {
    if !method.supports(train.task) {
        return Err(Error::InvalidConfig(format!(
            "{} supports regression only",
            method.name()
        )));
    }
    let metric = Metric::for_task(train.task);
    let solver = &tuning.solver;
    let (prediction, chosen) = match method {
        Method::Landmark => {
            let grid = landmark_grid(
                train,
                &tuning.landmark_lambda1_fractions,
                &tuning.landmark_lambda2,
                &tuning.stage2_lambdas,
            )?;
            let template = FitOptions {
                solver: solver.clone(),
                autoregressive: tuning.autoregressive,
                ..FitOptions::new(0.0, 0.0, 1.0)
            };
            let best: GridCell = if grid.len() == 1 {
                grid[0]
            } else {
                cross_validate_with(train, &grid, tuning.folds, seed, metric, &template)?.best
            };
            let options = FitOptions {
                lambda1: best.lambda1,
                lambda2: best.lambda2,
                lambda_stage2: best.lambda_stage2,
                ..template
            };
            let model = fit(train, &options)?;
            (
                model.predict(&test.x)?,
                vec![best.lambda1, best.lambda2, best.lambda_stage2],
            )
        }
        Method::OneVsAll => {
            let best = pick(
                train,
                &tuning.ridge_lambdas,
                tuning.folds,
                seed,
                metric,
                |l, d| fit_one_vs_all(d, l),
            )?;
            (fit_one_vs_all(train, best)?.predict(&test.x)?, vec![best])
        }
        Method::GroupLasso => {
            let (xc, yc) = centered(train);
            let kill = kill_lambda(&xc, &yc, 0.0)?;
            let grid: Vec<f64> = tuning
                .group_lasso_fractions
                .iter()
                .map(|f| f * kill)
                .collect();
            let best = pick(train, &grid, tuning.folds, seed, metric, |l, d| {
                fit_group_lasso(d, l, solver)
            })?;
            (
                fit_group_lasso(train, best, solver)?.predict(&test.x)?,
                vec![best],
            )
        }
        Method::LowRank => {
            let (xc, yc) = centered(train);
            let kill = trace_kill_lambda(&xc, &yc)?;
            let grid: Vec<f64> = tuning.low_rank_fractions.iter().map(|f| f * kill).collect();
            let best = pick(train, &grid, tuning.folds, seed, metric, |l, d| {
                fit_low_rank(d, l, solver)
            })?;
            (
                fit_low_rank(train, best, solver)?.predict(&test.x)?,
                vec![best],
            )
        }
    };
    Ok(Evaluation {
        method,
        report: MetricsReport::evaluate(test.task, &test.y, &prediction)?,
        chosen,
    })
}

fn pick<M, F>(
    train: &Dataset,
    grid: &[f64],
    folds: usize,
    seed: u64,
    metric: Metric,
    fit_one: F,
) -> Result<f64>
where
    F: Fn(f64, &Dataset) -> Result<M>,
    M: Predictor,
{
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    Ok(cross_validate_by(
        train,
        grid,
        folds,
        seed,
        metric,
        |lambda, d, x| fit_one(*lambda, d)?.predict_matrix(x),
        |lambda| (*lambda, 0.0),
    )?
    .best)
}

trait Predictor {
    fn predict_matrix(&self, x: &Matrix) -> Result<Matrix>;
}

impl Predictor for crate::baselines::BaselineModel {
    fn predict_matrix(&self, x: &Matrix) -> Result<Matrix> {
        self.predict(x)
    }
}

/// One row of a sweep table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub method: String,
    pub n: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub task: Task,
    /// Template; `n_train` and `seed` are overridden per run.
    pub spec: SyntheticSpec,
    pub n_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub tuning: Tuning,
}

/// Sample-size sweep: for every `(n, seed)` draws a fresh synthetic problem
/// and evaluates every method on it.
pub fn sample_size_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::new();
    for &n in &config.n_grid {
        for &seed in &config.seeds {
            let spec = SyntheticSpec {
                n_train: n,
                seed,
                ..config.spec.clone()
            };
            let data = match config.task {
                Task::Regression => gen_synthetic_regression(&spec)?,
                Task::Classification => gen_synthetic_classification(&spec)?,
            };
            for &method in config.methods.iter().filter(|m| m.supports(config.task)) {
                let eval =
                    tune_and_evaluate(method, &data.train, &data.test, &config.tuning, seed)?;
                for (metric, value) in eval.report.entries() {
                    records.push(SweepRecord {
                        method: method.name().to_string(),
                        n,
                        seed,
                        metric: metric.to_string(),
                        value,
                    });
                }
            }
        }
    }
    Ok(records)
}

/// Mean of `metric` for `method` at sample size `n`.
pub fn mean_of(records: &[SweepRecord], method: Method, n: usize, metric: &str) -> Option<f64> {
    let values: Vec<f64> = records
        .iter()
        .filter(|r| r.method == method.name() && r.n == n && r.metric == metric)
        .map(|r| r.value)
        .collect();
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}
