//! Reference multi-output methods: independent per-output models,
//! group-lasso multivariate regression and trace-norm (low-rank)
//! multivariate regression.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::landmark::SCHEMA_VERSION;
use crate::linear::{
    fit_logistic, fit_ridge, harden, intercepts_from_means, LinearHead, LogisticConfig,
};
use crate::matrix::{matmul, svd, Matrix};
use crate::solver::{proximal_descent, sparsa_fit, Regularizer, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    OneVsAll,
    GroupLasso,
    LowRank,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::OneVsAll => "one_vs_all",
            BaselineKind::GroupLasso => "group_lasso",
            BaselineKind::LowRank => "low_rank",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub schema_version: u32,
    pub kind: BaselineKind,
    pub task: Task,
    /// Coefficients d × k plus intercepts.
    pub head: LinearHead,
    /// The method's single regularization weight.
    pub lambda: f64,
    pub x_means: Vec<f64>,
    pub y_means: Vec<f64>,
    /// Number of nonzero singular values (low-rank only).
    #[serde(default)]
    pub rank: Option<usize>,
    /// Feature rows with nonzero coefficients (group lasso only).
    #[serde(default)]
    pub support: Option<Vec<usize>>,
}

impl BaselineModel {
    pub fn coefficients(&self) -> &Matrix {
        &self.head.weights
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        let scores = self.head.scores(x)?;
        Ok(match self.task {
            Task::Regression => scores,
            Task::Classification => scores.map(crate::linear::sigmoid).map(harden),
        })
    }
}

pub fn predict_baseline(model: &BaselineModel, x: &Matrix) -> Result<Matrix> {
    model.predict(x)
}

/// k independent models: ridge for regression, L2-logistic for classification.
pub fn fit_one_vs_all(dataset: &Dataset, lambda: f64) -> Result<BaselineModel> {
    let head = match dataset.task {
        Task::Regression => fit_ridge(&dataset.x, &dataset.y, lambda)?,
        Task::Classification => fit_logistic(&dataset.x, &dataset.y, &LogisticConfig::new(lambda))?,
    };
    Ok(BaselineModel {
        schema_version: SCHEMA_VERSION,
        kind: BaselineKind::OneVsAll,
        task: dataset.task,
        head,
        lambda,
        x_means: dataset.x.column_means(),
        y_means: dataset.y.column_means(),
        rank: None,
        support: None,
    })
}

fn require_regression(dataset: &Dataset, method: &str) -> Result<()> {
    if dataset.task != Task::Regression {
        return Err(Error::InvalidConfig(format!(
            "{method} supports regression only"
        )));
    }
    Ok(())
}

/// `min ‖Yc − Xc·B‖_F² + λ·Σ_p ‖B_p‖₂` over centered data, feature rows as groups.
pub fn fit_group_lasso(
    dataset: &Dataset,
    lambda: f64,
    solver: &SolverConfig,
) -> Result<BaselineModel> {
    require_regression(dataset, "group lasso")?;
    let x_means = dataset.x.column_means();
    let y_means = dataset.y.column_means();
    let xc = dataset.x.center_columns(&x_means);
    let yc = dataset.y.center_columns(&y_means);
    let config = SolverConfig {
        lambda1: lambda,
        lambda2: 0.0,
        ..solver.clone()
    };
    let estimate = sparsa_fit(&xc, &yc, &config)?;
    let intercepts = intercepts_from_means(&estimate.coef, &x_means, &y_means);
    Ok(BaselineModel {
        schema_version: SCHEMA_VERSION,
        kind: BaselineKind::GroupLasso,
        task: Task::Regression,
        head: LinearHead {
            weights: estimate.coef,
            intercepts,
        },
        lambda,
        x_means,
        y_means,
        rank: None,
        support: Some(estimate.support),
    })
}

/// `λ·Σ σ_i(B)`, with singular-value soft thresholding as its prox.
pub(crate) struct TraceNorm {
    pub lambda: f64,
}

impl Regularizer for TraceNorm {
    fn value(&self, b: &Matrix) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        let s = svd(b)
            .map(|f| f.s.iter().sum::<f64>())
            .unwrap_or(f64::INFINITY);
        self.lambda * s
    }

    fn prox(&self, u: &Matrix, alpha: f64) -> Result<(Matrix, f64)> {
        if self.lambda == 0.0 {
            return Ok((u.clone(), 0.0));
        }
        let (z, nuclear) = shrink_spectrum(u, self.lambda / alpha)?;
        Ok((z, self.lambda * nuclear))
    }
}

pub fn singular_value_threshold(u: &Matrix, tau: f64) -> Result<Matrix> {
    Ok(shrink_spectrum(u, tau)?.0)
}

/// Thresholded matrix together with its nuclear norm.
fn shrink_spectrum(u: &Matrix, tau: f64) -> Result<(Matrix, f64)> {
    let mut f = svd(u)?;
    f.s.iter_mut().for_each(|s| *s = (*s - tau).max(0.0));
    let r = f.rank();
    if r == 0 {
        return Ok((Matrix::zeros(u.rows(), u.cols()), 0.0));
    }
    let us = Matrix::from_fn(u.rows(), r, |i, j| f.u.get(i, j) * f.s[j]);
    let vt = Matrix::from_fn(r, u.cols(), |i, j| f.v.get(j, i));
    Ok((matmul(&us, &vt)?, f.s.iter().sum()))
}

fn numerical_rank(singular_values: &[f64], m: &Matrix) -> usize {
    let top = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = top * m.rows().max(m.cols()) as f64 * f64::EPSILON;
    singular_values.iter().filter(|s| **s > cutoff).count()
}

/// Orthonormal basis (d × r) of the row space of `x`, or `None` when `x`
/// already has full column rank.
fn row_space_basis(x: &Matrix) -> Result<Option<Matrix>> {
    let f = svd(x)?;
    let r = numerical_rank(&f.s, x);
    if r == x.cols() {
        return Ok(None);
    }
    Ok(Some(Matrix::from_fn(x.cols(), r.max(1), |i, j| {
        f.v.get(i, j)
    })))
}

/// `min ‖Yc − Xc·B‖_F² + λ·‖B‖_*` by monotone proximal gradient.
pub fn fit_low_rank(
    dataset: &Dataset,
    lambda: f64,
    solver: &SolverConfig,
) -> Result<BaselineModel> {
    require_regression(dataset, "low-rank regression")?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "trace penalty must be >= 0, got {lambda}"
        )));
    }
    let x_means = dataset.x.column_means();
    let y_means = dataset.y.column_means();
    let xc = dataset.x.center_columns(&x_means);
    let yc = dataset.y.center_columns(&y_means);
    let config = SolverConfig {
        lambda1: lambda,
        lambda2: 0.0,
        ..solver.clone()
    };
    // The optimum lies in the row space of Xc, and B = Q·M has the same
    // singular values as M, so the smaller problem in M is equivalent.
    let reg = TraceNorm { lambda };
    let coef = match row_space_basis(&xc)? {
        Some(q) => matmul(
            &q,
            &proximal_descent(&matmul(&xc, &q)?, &yc, &reg, &config)?.coef,
        )?,
        None => proximal_descent(&xc, &yc, &reg, &config)?.coef,
    };
    let rank = numerical_rank(&svd(&coef)?.s, &coef);
    let intercepts = intercepts_from_means(&coef, &x_means, &y_means);
    Ok(BaselineModel {
        schema_version: SCHEMA_VERSION,
        kind: BaselineKind::LowRank,
        task: Task::Regression,
        head: LinearHead {
            weights: coef,
            intercepts,
        },
        lambda,
        x_means,
        y_means,
        rank: Some(rank),
        support: None,
    })
}
