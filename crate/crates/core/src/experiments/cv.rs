//! K-fold cross-validation over a hyperparameter grid.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::experiments::metrics::{hamming_loss, mse};
use crate::landmark::{fit, FitOptions};
use crate::matrix::Matrix;
use crate::rng::stream;
use crate::solver::{kill_lambda, SolverConfig};

/// One point of the landmark grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_stage2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mse,
    Hamming,
}

impl Metric {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Regression => Metric::Mse,
            Task::Classification => Metric::Hamming,
        }
    }

    pub fn loss(&self, truth: &Matrix, predicted: &Matrix) -> Result<f64> {
        match self {
            Metric::Mse => mse(truth, predicted),
            Metric::Hamming => hamming_loss(truth, predicted),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult<C> {
    pub best: C,
    pub best_index: usize,
    /// Mean validation loss per cell, `+∞` where a fold failed.
    pub scores: Vec<f64>,
}

/// Fold label of every row: position in a seeded shuffle, modulo `folds`.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, &[0xcf]));
    let mut fold = vec![0; n];
    for (pos, row) in order.into_iter().enumerate() {
        fold[row] = pos % folds;
    }
    fold
}

/// Generic grid search. `fit_predict` trains on the training part and
/// predicts the validation inputs; `sparsity` orders tied cells, larger
/// keys win.
pub fn cross_validate_by<C, F, S>(
    dataset: &Dataset,
    cells: &[C],
    folds: usize,
    seed: u64,
    metric: Metric,
    mut fit_predict: F,
    sparsity: S,
) -> Result<CvResult<C>>
where
    C: Clone,
    F: FnMut(&C, &Dataset, &Matrix) -> Result<Matrix>,
    S: Fn(&C) -> (f64, f64),
{
    let n = dataset.n_samples();
    if folds < 2 || folds > n {
        return Err(Error::InvalidConfig(format!(
            "folds must be in [2, {n}], got {folds}"
        )));
    }
    if cells.is_empty() {
        return Err(Error::InvalidConfig("empty hyperparameter grid".into()));
    }
    let assignment = fold_assignment(n, folds, seed);
    let splits: Vec<(Dataset, Dataset)> = (0..folds)
        .map(|f| {
            let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != f).collect();
            let valid: Vec<usize> = (0..n).filter(|&i| assignment[i] == f).collect();
            (dataset.subset(&train), dataset.subset(&valid))
        })
        .collect();

    let scores: Vec<f64> = cells
        .iter()
        .map(|cell| {
            let mut total = 0.0;
            for (train, valid) in &splits {
                let loss =
                    fit_predict(cell, train, &valid.x).and_then(|p| metric.loss(&valid.y, &p));
                match loss {
                    Ok(v) if v.is_finite() => total += v,
                    _ => return f64::INFINITY,
                }
            }
            total / folds as f64
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, score) in scores.iter().enumerate() {
        if !score.is_finite() {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) if *score < scores[b] => Some(i),
            Some(b) if *score == scores[b] && sparsity(&cells[i]) > sparsity(&cells[b]) => Some(i),
            keep => keep,
        };
    }
    let best_index = best.ok_or(Error::InfeasibleGrid)?;
    Ok(CvResult {
        best: cells[best_index].clone(),
        best_index,
        scores,
    })
}

/// Grid search for the landmark model. Ties go to the larger `λ₁`, then the
/// larger `λ₂`.
pub fn cross_validate(
    dataset: &Dataset,
    grid: &[GridCell],
    folds: usize,
    seed: u64,
    metric: Metric,
    solver: &SolverConfig,
) -> Result<CvResult<GridCell>> {
    let template = FitOptions {
        solver: solver.clone(),
        ..FitOptions::new(0.0, 0.0, 1.0)
    };
    cross_validate_with(dataset, grid, folds, seed, metric, &template)
}

/// As [`cross_validate`], with every fit built from `template` (its
/// penalties replaced by the cell's).
pub fn cross_validate_with(
    dataset: &Dataset,
    grid: &[GridCell],
    folds: usize,
    seed: u64,
    metric: Metric,
    template: &FitOptions,
) -> Result<CvResult<GridCell>> {
    cross_validate_by(
        dataset,
        grid,
        folds,
        seed,
        metric,
        |cell, train, x_valid| {
            let options = FitOptions {
                lambda1: cell.lambda1,
                lambda2: cell.lambda2,
                lambda_stage2: cell.lambda_stage2,
                ..template.clone()
            };
            fit(train, &options)?.predict(x_valid)
        },
        |cell| (cell.lambda1, cell.lambda2),
    )
}

/// The `λ₁` above which landmark selection on `dataset` returns no rows.
pub fn landmark_kill_lambda(dataset: &Dataset, lambda2: f64) -> Result<f64> {
    let outputs = dataset.y.center_columns(&dataset.y.column_means());
    kill_lambda(&outputs, &outputs, lambda2)
}

/// Cartesian grid with `λ₁` given as fractions of the data's kill level.
pub fn landmark_grid(
    dataset: &Dataset,
    lambda1_fractions: &[f64],
    lambda2_values: &[f64],
    stage2_values: &[f64],
) -> Result<Vec<GridCell>> {
    let mut grid = Vec::new();
    for &lambda2 in lambda2_values {
        let kill = landmark_kill_lambda(dataset, lambda2)?;
        for &frac in lambda1_fractions {
            for &lambda_stage2 in stage2_values {
                grid.push(GridCell {
                    lambda1: frac * kill,
                    lambda2,
                    lambda_stage2,
                });
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::synthetic::{gen_synthetic_regression, SyntheticSpec};

    fn data() -> Dataset {
        gen_synthetic_regression(&SyntheticSpec::new(12, 6, 3, 40, 10, 5))
            .unwrap()
            .train
    }

    #[test]
    fn folds_are_balanced_and_seeded() {
        let a = fold_assignment(23, 4, 1);
        for f in 0..4 {
            let count = a.iter().filter(|x| **x == f).count();
            assert!(count == 5 || count == 6);
        }
        assert_eq!(a, fold_assignment(23, 4, 1));
        assert_ne!(a, fold_assignment(23, 4, 2));
    }

    #[test]
    fn singleton_grid_returns_its_cell() {
        let d = data();
        let cell = GridCell {
            lambda1: 0.1 * landmark_kill_lambda(&d, 0.0).unwrap(),
            lambda2: 0.0,
            lambda_stage2: 1.0,
        };
        let r = cross_validate(&d, &[cell], 3, 1, Metric::Mse, &SolverConfig::default()).unwrap();
        assert_eq!(r.best, cell);
        assert!(r.scores[0].is_finite());
    }

    #[test]
    fn infeasible_grid_is_an_error() {
        let d = data();
        let kill = landmark_kill_lambda(&d, 0.0).unwrap();
        let grid: Vec<GridCell> = [2.0, 3.0]
            .iter()
            .map(|f| GridCell {
                lambda1: f * kill,
                lambda2: 0.0,
                lambda_stage2: 1.0,
            })
            .collect();
        assert!(matches!(
            cross_validate(&d, &grid, 3, 1, Metric::Mse, &SolverConfig::default()),
            Err(Error::InfeasibleGrid)
        ));
    }

    #[test]
    fn failing_cells_score_infinity() {
        let d = data();
        let cells = [1.0, 2.0, 3.0];
        let r = cross_validate_by(
            &d,
            &cells,
            2,
            0,
            Metric::Mse,
            |c, _, x| {
                if *c == 2.0 {
                    Err(Error::EmptySupport)
                } else {
                    Ok(Matrix::zeros(x.rows(), 12))
                }
            },
            |c| (*c, 0.0),
        )
        .unwrap();
        assert!(r.scores[1].is_infinite());
        // Cells 0 and 2 tie exactly; the sparser (larger) one wins.
        assert_eq!(r.scores[0], r.scores[2]);
        assert_eq!(r.best, 3.0);
    }

    #[test]
    fn rejects_bad_fold_counts() {
        let d = data();
        let cells = [1.0];
        let run = |folds| {
            cross_validate_by(
                &d,
                &cells,
                folds,
                0,
                Metric::Mse,
                |_, _, x| Ok(x.clone()),
                |c| (*c, 0.0),
            )
        };
        assert!(run(1).is_err());
        assert!(run(41).is_err());
    }
}
