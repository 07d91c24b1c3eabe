//! Per-output linear models: ridge regression and L2-regularized logistic
//! regression, both with an unpenalized intercept.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{cholesky, cholesky_solve, l2_norm, matmul, ridge_solve, Matrix};

/// Decision threshold for binary outputs. A probability of exactly 0.5 is a 0.
pub const DECISION_THRESHOLD: f64 = 0.5;

/// Hardens a score to {0, 1} using the strict `> 0.5` rule.
#[inline]
pub fn harden(v: f64) -> f64 {
    if v > DECISION_THRESHOLD {
        1.0
    } else {
        0.0
    }
}

/// `x·weights + intercepts`, one column per output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    /// d × m
    pub weights: Matrix,
    /// length m
    pub intercepts: Vec<f64>,
}

impl LinearHead {
    pub fn n_inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_outputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn scores(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.n_inputs() {
            return Err(Error::shapes("predict", x.shape(), self.weights.shape()));
        }
        Ok(matmul(x, &self.weights)?.shift_columns(&self.intercepts))
    }

    pub fn probabilities(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.scores(x)?.map(sigmoid))
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Multi-output ridge regression with intercepts:
/// `min ‖Y − XW − 1bᵀ‖_F² + λ‖W‖_F²`, solved on centered data.
pub fn fit_ridge(x: &Matrix, y: &Matrix, lambda: f64) -> Result<LinearHead> {
    if x.rows() != y.rows() {
        return Err(Error::shapes("fit_ridge", x.shape(), y.shape()));
    }
    let x_means = x.column_means();
    let y_means = y.column_means();
    let weights = ridge_solve(
        &x.center_columns(&x_means),
        &y.center_columns(&y_means),
        lambda,
    )?;
    let intercepts = intercepts_from_means(&weights, &x_means, &y_means);
    Ok(LinearHead {
        weights,
        intercepts,
    })
}

pub(crate) fn intercepts_from_means(
    weights: &Matrix,
    x_means: &[f64],
    y_means: &[f64],
) -> Vec<f64> {
    (0..weights.cols())
        .map(|j| {
            let shift: f64 = x_means
                .iter()
                .enumerate()
                .map(|(p, m)| m * weights.get(p, j))
                .sum();
            y_means[j] - shift
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticConfig {
    /// Penalty on `‖w‖²` (intercept excluded).
    pub lambda: f64,
    /// Stop when the gradient norm falls below `tol·max(1, initial gradient norm)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl LogisticConfig {
    pub fn new(lambda: f64) -> Self {
        LogisticConfig {
            lambda,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

/// Fits one logistic model per column of the binary matrix `y`.
pub fn fit_logistic(x: &Matrix, y: &Matrix, config: &LogisticConfig) -> Result<LinearHead> {
    if x.rows() != y.rows() {
        return Err(Error::shapes("fit_logistic", x.shape(), y.shape()));
    }
    if !(config.lambda >= 0.0 && config.lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "logistic penalty must be >= 0, got {}",
            config.lambda
        )));
    }
    let d = x.cols();
    let mut weights = Matrix::zeros(d, y.cols());
    let mut intercepts = Vec::with_capacity(y.cols());
    for j in 0..y.cols() {
        let (w, b) = fit_logistic_single(x, &y.column(j), config)?;
        for (p, v) in w.iter().enumerate() {
            weights.set(p, j, *v);
        }
        intercepts.push(b);
    }
    Ok(LinearHead {
        weights,
        intercepts,
    })
}

struct LogisticProblem<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    lambda: f64,
}

impl LogisticProblem<'_> {
    /// Parameter layout: `[w_0 .. w_{d-1}, b]`.
    fn value(&self, theta: &[f64]) -> f64 {
        let d = self.x.cols();
        let mut total = 0.0;
        for i in 0..self.x.rows() {
            let z = dot(self.x.row(i), &theta[..d]) + theta[d];
            total += softplus(z) - self.y[i] * z;
        }
        total + self.lambda * theta[..d].iter().map(|w| w * w).sum::<f64>()
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.x.cols();
        let mut g = vec![0.0; d + 1];
        for i in 0..self.x.rows() {
            let row = self.x.row(i);
            let r = sigmoid(dot(row, &theta[..d]) + theta[d]) - self.y[i];
            g[..d]
                .iter_mut()
                .zip(row)
                .for_each(|(gp, xp)| *gp += r * xp);
            g[d] += r;
        }
        g[..d]
            .iter_mut()
            .zip(&theta[..d])
            .for_each(|(gp, w)| *gp += 2.0 * self.lambda * w);
        g
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Damped Newton iterations with Armijo backtracking on the Newton step.
fn fit_logistic_single(x: &Matrix, y: &[f64], config: &LogisticConfig) -> Result<(Vec<f64>, f64)> {
    let d = x.cols();
    let problem = LogisticProblem {
        x,
        y,
        lambda: config.lambda,
    };
    let mut theta = vec![0.0; d + 1];
    let mut value = problem.value(&theta);
    let mut grad = problem.gradient(&theta);
    let stop = config.tol * l2_norm(&grad).max(1.0);

    for it in 0..config.max_iter {
        if l2_norm(&grad) <= stop {
            break;
        }
        let direction = problem.newton_direction(&theta, &grad)?;
        let slope = dot(&grad, &direction);
        let mut step = 1.0;
        let accepted = loop {
            let next: Vec<f64> = theta
                .iter()
                .zip(&direction)
                .map(|(t, p)| t - step * p)
                .collect();
            let next_value = problem.value(&next);
            if next_value <= value - 1e-4 * step * slope {
                break Some((next, next_value));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        // No further decrease representable.
        let Some((next, next_value)) = accepted else {
            break;
        };
        if !next_value.is_finite() {
            return Err(Error::Diverged(it + 1));
        }
        theta = next;
        value = next_value;
        grad = problem.gradient(&theta);
    }
    Ok((theta[..d].to_vec(), theta[d]))
}

impl LogisticProblem<'_> {
    /// Solves `H·p = g`; the Hessian is shifted when it is numerically
    /// singular (no penalty and saturated probabilities).
    fn newton_direction(&self, theta: &[f64], grad: &[f64]) -> Result<Vec<f64>> {
        let d = self.x.cols();
        let mut h = Matrix::zeros(d + 1, d + 1);
        for i in 0..self.x.rows() {
            let row = self.x.row(i);
            let p = sigmoid(dot(row, &theta[..d]) + theta[d]);
            let w = p * (1.0 - p);
            for a in 0..d {
                let wa = w * row[a];
                for b in 0..=a {
                    h.set(a, b, h.get(a, b) + wa * row[b]);
                }
                h.set(d, a, h.get(d, a) + wa);
            }
            h.set(d, d, h.get(d, d) + w);
        }
        for a in 0..=d {
            for b in 0..a {
                h.set(b, a, h.get(a, b));
            }
        }
        for a in 0..d {
            h.set(a, a, h.get(a, a) + 2.0 * self.lambda);
        }
        let g = Matrix::from_vec(d + 1, 1, grad.to_vec())?;
        let scale = (0..=d).map(|a| h.get(a, a)).fold(0.0, f64::max).max(1e-300);
        let mut shift = 0.0;
        loop {
            let mut shifted = h.clone();
            for a in 0..=d {
                shifted.set(a, a, h.get(a, a) + shift);
            }
            if let Ok(l) = cholesky(&shifted) {
                return Ok(cholesky_solve(&l, &g)?.into_vec());
            }
            shift = if shift == 0.0 {
                1e-10 * scale
            } else {
                shift * 10.0
            };
            if shift > 1e10 * scale {
                return Err(Error::Singular("logistic Newton system"));
            }
        }
    }
}
