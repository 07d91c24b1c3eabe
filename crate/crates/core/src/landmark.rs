//! The three-step landmark pipeline.
//!
//! 1. Regress the output matrix on itself with a row-sparse penalty; the
//!    nonzero rows of the coefficient matrix `Â` are the landmarks `L`.
//! 2. Fit an input → landmark model (ridge for regression, one logistic
//!    model per landmark for classification).
//! 3. Predict landmarks with the step-2 model and every other output by
//!    pushing the predicted landmarks through `Â`.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::linear::{fit_logistic, fit_ridge, harden, LinearHead, LogisticConfig};
use crate::matrix::Matrix;
use crate::solver::{sparsa_fit, CoefficientEstimate, SolverConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandmarkModel {
    pub schema_version: u32,
    pub task: Task,
    /// Zero-based, ascending.
    pub landmarks: Vec<usize>,
    /// k × k; rows outside `landmarks` are exactly zero.
    pub a_hat: Matrix,
    /// Input → landmark head, d × s.
    pub stage2: LinearHead,
    /// Column means subtracted before selection (label frequencies for
    /// classification).
    pub y_means: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_stage2: f64,
    /// Classification only: push landmark probabilities through `Â` instead
    /// of hard labels.
    #[serde(default)]
    pub propagate_probabilities: bool,
    /// Autoregressive fits only: the columns of the input fed to step 2
    /// (the lagged landmarks). `None` means every input column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_columns: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_stage2: f64,
    /// Step-size and stopping controls; its lambdas are overridden.
    pub solver: SolverConfig,
    pub propagate_probabilities: bool,
    /// The input row holds the previous values of the outputs; step 2 then
    /// regresses the landmarks on their own lagged values only.
    pub autoregressive: bool,
}

impl FitOptions {
    pub fn new(lambda1: f64, lambda2: f64, lambda_stage2: f64) -> Self {
        FitOptions {
            lambda1,
            lambda2,
            lambda_stage2,
            solver: SolverConfig::default(),
            propagate_probabilities: false,
            autoregressive: false,
        }
    }
}

/// Nonzero rows of the estimate, ascending.
pub fn select_landmarks(estimate: &CoefficientEstimate) -> Result<Vec<usize>> {
    if estimate.support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut support = estimate.support.clone();
    support.sort_unstable();
    Ok(support)
}

/// Runs step 1 only: returns the selection estimate and the centering used.
pub fn select(
    dataset: &Dataset,
    lambda1: f64,
    lambda2: f64,
    solver: &SolverConfig,
) -> Result<(CoefficientEstimate, Vec<f64>)> {
    let config = SolverConfig {
        lambda1,
        lambda2,
        ..solver.clone()
    };
    // Binary labels are centered as well: uncentered, the shared mean
    // direction dominates and nearly every output gets selected.
    let y_means = dataset.y.column_means();
    let outputs = dataset.y.center_columns(&y_means);
    Ok((sparsa_fit(&outputs, &outputs, &config)?, y_means))
}

pub fn fit(dataset: &Dataset, options: &FitOptions) -> Result<LandmarkModel> {
    Ok(fit_detailed(dataset, options)?.0)
}

/// [`fit`] that also returns the step-1 estimate (objective trace,
/// iteration count).
pub fn fit_detailed(
    dataset: &Dataset,
    options: &FitOptions,
) -> Result<(LandmarkModel, CoefficientEstimate)> {
    if !(options.lambda_stage2 > 0.0 && options.lambda_stage2.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "stage-2 penalty must be > 0, got {}",
            options.lambda_stage2
        )));
    }
    let (estimate, y_means) = select(dataset, options.lambda1, options.lambda2, &options.solver)?;
    let landmarks = select_landmarks(&estimate)?;
    let y_landmarks = dataset.y.select_columns(&landmarks);
    let input_columns = if options.autoregressive {
        if dataset.n_features() != dataset.n_outputs() {
            return Err(Error::InvalidConfig(format!(
                "autoregressive fit needs lagged outputs as inputs: {} features for {} outputs",
                dataset.n_features(),
                dataset.n_outputs()
            )));
        }
        Some(landmarks.clone())
    } else {
        None
    };
    let inputs = match &input_columns {
        Some(cols) => dataset.x.select_columns(cols),
        None => dataset.x.clone(),
    };
    let stage2 = match dataset.task {
        Task::Regression => fit_ridge(&inputs, &y_landmarks, options.lambda_stage2)?,
        Task::Classification => fit_logistic(
            &inputs,
            &y_landmarks,
            &LogisticConfig::new(options.lambda_stage2),
        )?,
    };
    let model = LandmarkModel {
        schema_version: SCHEMA_VERSION,
        task: dataset.task,
        landmarks,
        a_hat: estimate.coef.clone(),
        stage2,
        y_means,
        lambda1: options.lambda1,
        lambda2: options.lambda2,
        lambda_stage2: options.lambda_stage2,
        propagate_probabilities: options.propagate_probabilities,
        input_columns,
    };
    Ok((model, estimate))
}

impl LandmarkModel {
    pub fn n_outputs(&self) -> usize {
        self.a_hat.cols()
    }

    pub fn n_inputs(&self) -> usize {
        match self.input_columns {
            Some(_) => self.n_outputs(),
            None => self.stage2.n_inputs(),
        }
    }

    /// Stage-2 output for the landmarks, m × s. Hard labels for
    /// classification unless probabilities are requested.
    fn landmark_outputs(&self, x: &Matrix, hard: bool) -> Result<Matrix> {
        let selected;
        let x = match &self.input_columns {
            Some(cols) => {
                selected = x.select_columns(cols);
                &selected
            }
            None => x,
        };
        match self.task {
            Task::Regression => self.stage2.scores(x),
            Task::Classification => {
                let probs = self.stage2.probabilities(x)?;
                Ok(if hard { probs.map(harden) } else { probs })
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.n_inputs() {
            return Err(Error::shapes(
                "predict",
                x.shape(),
                (self.n_inputs(), self.n_outputs()),
            ));
        }
        let k = self.n_outputs();
        let hard_landmarks = self.landmark_outputs(x, true)?;
        let propagated = match self.task {
            Task::Classification if self.propagate_probabilities => {
                self.landmark_outputs(x, false)?
            }
            _ => hard_landmarks.clone(),
        };
        let mut is_landmark = vec![None; k];
        for (pos, &l) in self.landmarks.iter().enumerate() {
            is_landmark[l] = Some(pos);
        }

        let mut out = Matrix::zeros(x.rows(), k);
        for r in 0..x.rows() {
            let src = propagated.row(r);
            for j in 0..k {
                let value = match is_landmark[j] {
                    Some(pos) => hard_landmarks.get(r, pos),
                    None => {
                        let mut acc = 0.0;
                        for (pos, &l) in self.landmarks.iter().enumerate() {
                            acc += (src[pos] - self.y_means[l]) * self.a_hat.get(l, j);
                        }
                        match self.task {
                            Task::Regression => acc + self.y_means[j],
                            Task::Classification => harden(acc + self.y_means[j]),
                        }
                    }
                };
                out.set(r, j, value);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::kill_lambda;

    fn planted(n: usize, seed: u64) -> Dataset {
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let x = Matrix::from_fn(n, 4, |_, _| next());
        // Landmarks 0 and 1 are linear in x; outputs 2..5 mix them.
        let y = Matrix::from_fn(n, 5, |i, j| {
            let l0 = x.get(i, 0) + 0.5 * x.get(i, 1) + 1.0;
            let l1 = x.get(i, 2) - x.get(i, 3);
            match j {
                0 => l0,
                1 => l1,
                2 => l0 - l1,
                3 => 0.8 * l0,
                _ => -0.7 * l1,
            }
        });
        Dataset::new(x, y, Task::Regression).unwrap()
    }

    #[test]
    fn select_landmarks_reads_support() {
        let estimate = CoefficientEstimate {
            coef: Matrix::zeros(6, 6),
            row_norms: vec![0.0; 6],
            support: vec![],
            objective_trace: vec![1.0],
            iterations: 1,
            converged: true,
        };
        assert!(matches!(
            select_landmarks(&estimate),
            Err(Error::EmptySupport)
        ));
        let estimate = CoefficientEstimate {
            support: vec![2, 5],
            ..estimate
        };
        assert_eq!(select_landmarks(&estimate).unwrap(), vec![2, 5]);
    }

    #[test]
    fn over_regularized_fit_fails() {
        let data = planted(40, 1);
        let centered = data.y.center_columns(&data.y.column_means());
        let kill = kill_lambda(&centered, &centered, 0.0).unwrap();
        let err = fit(&data, &FitOptions::new(1.01 * kill, 0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::EmptySupport));
    }

    #[test]
    fn landmarks_are_passed_through_untouched() {
        let data = planted(60, 2);
        let centered = data.y.center_columns(&data.y.column_means());
        let kill = kill_lambda(&centered, &centered, 0.0).unwrap();
        let model = fit(&data, &FitOptions::new(0.05 * kill, 0.0, 1e-6)).unwrap();
        let pred = model.predict(&data.x).unwrap();
        let direct = model.stage2.scores(&data.x).unwrap();
        for (pos, &l) in model.landmarks.iter().enumerate() {
            for r in 0..data.n_samples() {
                assert_eq!(pred.get(r, l), direct.get(r, pos));
            }
        }
    }

    #[test]
    fn zero_row_outputs_predict_the_mean() {
        let data = planted(30, 3);
        let mut model = fit(&data, &FitOptions::new(1.0, 0.0, 1.0)).unwrap();
        let j = (0..5).find(|j| !model.landmarks.contains(j)).unwrap_or(4);
        if model.landmarks.contains(&j) {
            model.landmarks.retain(|l| *l != j);
        }
        for &l in &model.landmarks {
            model.a_hat.set(l, j, 0.0);
        }
        let pred = model.predict(&data.x).unwrap();
        for r in 0..data.n_samples() {
            assert_eq!(pred.get(r, j), model.y_means[j]);
        }
    }

    #[test]
    fn rejects_wrong_input_width() {
        let data = planted(30, 4);
        let model = fit(&data, &FitOptions::new(1.0, 0.0, 1.0)).unwrap();
        assert!(matches!(
            model.predict(&Matrix::zeros(2, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn boundary_probability_hardens_to_zero() {
        // A head with zero weights and intercept yields probability 0.5 exactly.
        let model = LandmarkModel {
            schema_version: SCHEMA_VERSION,
            task: Task::Classification,
            landmarks: vec![0],
            a_hat: Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            stage2: LinearHead {
                weights: Matrix::zeros(2, 1),
                intercepts: vec![0.0],
            },
            y_means: vec![0.0, 0.0],
            lambda1: 0.0,
            lambda2: 0.0,
            lambda_stage2: 1.0,
            propagate_probabilities: false,
            input_columns: None,
        };
        let pred = model
            .predict(&Matrix::from_rows(&[vec![0.3, -0.2]]).unwrap())
            .unwrap();
        assert_eq!(pred.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn autoregressive_fit_uses_lagged_landmarks_only() {
        let data = planted(50, 5);
        let lagged = Dataset::new(
            data.y.select_rows(&(0..49).collect::<Vec<_>>()),
            data.y.select_rows(&(1..50).collect::<Vec<_>>()),
            Task::Regression,
        )
        .unwrap();
        let options = FitOptions {
            autoregressive: true,
            ..FitOptions::new(1.0, 0.0, 1.0)
        };
        let model = fit(&lagged, &options).unwrap();
        assert_eq!(
            model.input_columns.as_deref(),
            Some(model.landmarks.as_slice())
        );
        assert_eq!(model.stage2.n_inputs(), model.landmarks.len());
        assert_eq!(model.n_inputs(), 5);
        // Non-landmark inputs have no effect on the prediction.
        let mut x = lagged.x.clone();
        let before = model.predict(&x).unwrap();
        for j in (0..5).filter(|j| !model.landmarks.contains(j)) {
            for r in 0..x.rows() {
                x.set(r, j, 1e3);
            }
        }
        assert_eq!(model.predict(&x).unwrap(), before);
        assert!(fit(&data, &options).is_err());
    }
}
