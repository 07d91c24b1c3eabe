//! Proximal gradient solver for squared loss with a row-group plus
//! elementwise L1 penalty.
//!
//! Minimizes `‖Y − XB‖_F² + λ₁·Σ_g ‖B_g‖₂ + λ₂·‖B‖₁` where the groups `B_g`
//! are the rows of `B`. Landmark selection calls it with `X = Y`; the
//! group-lasso baseline calls it with the input matrix and `λ₂ = 0`.
//!
//! Each iteration takes a gradient step `U = B − ∇f(B)/α` and applies the
//! closed-form row-wise shrinkage with thresholds `λ₁/α`, `λ₂/α`. The step
//! parameter `α` starts at the Lipschitz constant, is re-initialized with the
//! Barzilai-Borwein ratio after every accepted step, and is inflated until the
//! candidate meets a sufficient-decrease test, so the objective never
//! increases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    elementwise_l1, frobenius_sq, l2_norm, matmul, row_l2_norms, spectral_norm_sq, t_matmul, Matrix,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Row-group penalty weight.
    pub lambda1: f64,
    /// Elementwise L1 penalty weight.
    pub lambda2: f64,
    /// Stop when the relative objective change of an accepted step drops below this.
    pub tol: f64,
    pub max_iter: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Factor applied to `α` when a candidate is rejected.
    pub backtrack_factor: f64,
    pub suff_decrease: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda1: 0.0,
            lambda2: 0.0,
            tol: 1e-8,
            max_iter: 10_000,
            alpha_min: 1e-10,
            alpha_max: 1e10,
            backtrack_factor: 2.0,
            suff_decrease: 1e-4,
        }
    }
}

impl SolverConfig {
    pub fn with_lambdas(lambda1: f64, lambda2: f64) -> Self {
        SolverConfig {
            lambda1,
            lambda2,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lambda1 >= 0.0 && self.lambda1.is_finite()) {
            return bad(format!("lambda1 must be >= 0, got {}", self.lambda1));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return bad(format!("lambda2 must be >= 0, got {}", self.lambda2));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha_max && self.alpha_max.is_finite())
        {
            return bad(format!(
                "need 0 < alpha_min <= alpha_max, got [{}, {}]",
                self.alpha_min, self.alpha_max
            ));
        }
        if !(self.backtrack_factor > 1.0) {
            return bad(format!(
                "backtrack_factor must be > 1, got {}",
                self.backtrack_factor
            ));
        }
        if !(self.suff_decrease > 0.0) {
            return bad(format!(
                "suff_decrease must be > 0, got {}",
                self.suff_decrease
            ));
        }
        Ok(())
    }
}

/// Result of a solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    pub coef: Matrix,
    pub row_norms: Vec<f64>,
    /// Rows with nonzero norm, ascending.
    pub support: Vec<usize>,
    /// Objective at the initial point and at every accepted iterate.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl CoefficientEstimate {
    pub fn objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("trace holds the starting objective")
    }
}

/// Soft threshold at `tau`.
#[inline]
pub fn soft_threshold(v: f64, tau: f64) -> f64 {
    v.signum() * (v.abs() - tau).max(0.0)
}

/// `argmin_z ½‖z − u‖² + τ₁‖z‖₂ + τ₂‖z‖₁`: elementwise soft threshold at
/// `τ₂`, then group shrinkage of the result at `τ₁`.
pub fn prox_group_l1(u: &[f64], tau1: f64, tau2: f64) -> Vec<f64> {
    let mut h: Vec<f64> = u.iter().map(|v| soft_threshold(*v, tau2)).collect();
    shrink_group(&mut h, tau1);
    h
}

fn shrink_group(h: &mut [f64], tau1: f64) {
    let norm = l2_norm(h);
    if norm > tau1 {
        let factor = (norm - tau1) / norm;
        h.iter_mut().for_each(|v| *v *= factor);
    } else {
        h.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// `‖Y − XB‖_F² + λ₁‖B‖₁,₂ + λ₂‖B‖₁`.
pub fn objective(x: &Matrix, y: &Matrix, b: &Matrix, lambda1: f64, lambda2: f64) -> Result<f64> {
    check_shapes(x, y, b)?;
    let r = y.sub(&matmul(x, b)?)?;
    Ok(frobenius_sq(&r) + sparse_group_penalty(b, lambda1, lambda2))
}

/// `2·Xᵀ(XB − Y)`.
pub fn loss_gradient(x: &Matrix, y: &Matrix, b: &Matrix) -> Result<Matrix> {
    check_shapes(x, y, b)?;
    let r = matmul(x, b)?.sub(y)?;
    Ok(t_matmul(x, &r)?.scale(2.0))
}

fn check_shapes(x: &Matrix, y: &Matrix, b: &Matrix) -> Result<()> {
    if x.rows() != y.rows() {
        return Err(Error::shapes("design/response rows", x.shape(), y.shape()));
    }
    if b.shape() != (x.cols(), y.cols()) {
        return Err(Error::shapes(
            "coefficient shape",
            b.shape(),
            (x.cols(), y.cols()),
        ));
    }
    Ok(())
}

fn sparse_group_penalty(b: &Matrix, lambda1: f64, lambda2: f64) -> f64 {
    let mut total = 0.0;
    if lambda1 > 0.0 {
        total += lambda1 * row_l2_norms(b).iter().sum::<f64>();
    }
    if lambda2 > 0.0 {
        total += lambda2 * elementwise_l1(b);
    }
    total
}

/// Smallest `λ₁` for which `B = 0` is a fixed point of the prox step:
/// `max_g ‖soft(2(XᵀY)_g, λ₂)‖₂`.
pub fn kill_lambda(x: &Matrix, y: &Matrix, lambda2: f64) -> Result<f64> {
    if x.rows() != y.rows() {
        return Err(Error::shapes("kill_lambda", x.shape(), y.shape()));
    }
    let xty = t_matmul(x, y)?;
    Ok((0..xty.rows())
        .map(|g| {
            let row: Vec<f64> = xty
                .row(g)
                .iter()
                .map(|v| soft_threshold(2.0 * v, lambda2))
                .collect();
            l2_norm(&row)
        })
        .fold(0.0, f64::max))
}

/// A nonsmooth penalty with a computable proximal map.
pub(crate) trait Regularizer {
    fn value(&self, b: &Matrix) -> f64;
    /// `argmin_Z (α/2)‖Z − U‖² + penalty(Z)`, returned with `value(Z)`.
    fn prox(&self, u: &Matrix, alpha: f64) -> Result<(Matrix, f64)>;
}

pub(crate) struct SparseGroup {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Regularizer for SparseGroup {
    fn value(&self, b: &Matrix) -> f64 {
        sparse_group_penalty(b, self.lambda1, self.lambda2)
    }

    fn prox(&self, u: &Matrix, alpha: f64) -> Result<(Matrix, f64)> {
        let (tau1, tau2) = (self.lambda1 / alpha, self.lambda2 / alpha);
        let mut z = u.clone();
        for g in 0..z.rows() {
            let row = z.row_mut(g);
            row.iter_mut().for_each(|v| *v = soft_threshold(*v, tau2));
            shrink_group(row, tau1);
        }
        let value = self.value(&z);
        Ok((z, value))
    }
}

pub(crate) struct Descent {
    pub coef: Matrix,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Monotone proximal gradient on `‖Y − XB‖² + reg(B)` from `B = 0`.
pub(crate) fn proximal_descent<R: Regularizer>(
    x: &Matrix,
    y: &Matrix,
    reg: &R,
    config: &SolverConfig,
) -> Result<Descent> {
    config.validate()?;
    if x.rows() != y.rows() {
        return Err(Error::shapes("design/response rows", x.shape(), y.shape()));
    }
    let clamp = |a: f64| a.clamp(config.alpha_min, config.alpha_max);

    let mut b = Matrix::zeros(x.cols(), y.cols());
    let mut obj = frobenius_sq(y) + reg.value(&b);
    let mut grad = t_matmul(x, y)
        .and_then(|g| g.try_scale(-2.0))
        .map_err(|e| overflow_as_divergence(e, 0))?;
    let mut alpha = clamp(2.0 * spectral_norm_sq(x));
    let mut trace = vec![obj];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        iterations += 1;
        let it = iterations;
        let accepted = loop {
            let (cand, penalty) = grad
                .try_scale(1.0 / alpha)
                .and_then(|g| b.sub(&g))
                .and_then(|u| reg.prox(&u, alpha))
                .map_err(|e| overflow_as_divergence(e, it))?;
            let step_sq = frobenius_sq(&cand.sub(&b)?);
            let cand_residual = matmul(x, &cand)
                .and_then(|xb| y.sub(&xb))
                .map_err(|e| overflow_as_divergence(e, it))?;
            let cand_obj = frobenius_sq(&cand_residual) + penalty;
            if !cand_obj.is_finite() {
                return Err(Error::Diverged(iterations));
            }
            if cand_obj <= obj - config.suff_decrease * alpha * step_sq {
                break Some((cand, cand_residual, cand_obj, step_sq));
            }
            if alpha >= config.alpha_max {
                break None;
            }
            alpha = clamp(alpha * config.backtrack_factor);
        };
        // No descent left at working precision.
        let Some((cand, cand_residual, cand_obj, step_sq)) = accepted else {
            converged = true;
            break;
        };

        let cand_grad = t_matmul(x, &cand_residual)
            .and_then(|g| g.try_scale(-2.0))
            .map_err(|e| overflow_as_divergence(e, it))?;
        if step_sq > 0.0 {
            let curvature = cand_grad.sub(&grad)?.dot(&cand.sub(&b)?);
            alpha = clamp(curvature / step_sq);
        }

        let change = (obj - cand_obj).abs() / obj.abs().max(f64::MIN_POSITIVE);
        b = cand;
        grad = cand_grad;
        obj = cand_obj;
        trace.push(obj);
        if change < config.tol {
            converged = true;
            break;
        }
    }
    Ok(Descent {
        coef: b,
        objective_trace: trace,
        iterations,
        converged,
    })
}

fn overflow_as_divergence(e: Error, iteration: usize) -> Error {
    match e {
        Error::InvalidMatrix(_) => Error::Diverged(iteration),
        other => other,
    }
}

/// Fits the sparse-group penalized least-squares problem.
pub fn sparsa_fit(x: &Matrix, y: &Matrix, config: &SolverConfig) -> Result<CoefficientEstimate> {
    let reg = SparseGroup {
        lambda1: config.lambda1,
        lambda2: config.lambda2,
    };
    let run = proximal_descent(x, y, &reg, config)?;
    let row_norms = row_l2_norms(&run.coef);
    let support = row_norms
        .iter()
        .enumerate()
        .filter(|(_, n)| **n > 0.0)
        .map(|(i, _)| i)
        .collect();
    Ok(CoefficientEstimate {
        coef: run.coef,
        row_norms,
        support,
        objective_trace: run.objective_trace,
        iterations: run.iterations,
        converged: run.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lcg(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut s = seed ^ 0x9e3779b97f4a7c15;
        Matrix::from_fn(rows, cols, |_, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn prox_examples() {
        assert_eq!(prox_group_l1(&[0.0; 4], 0.7, 0.3), vec![0.0; 4]);
        let u = [1.5, -0.2, 3.0];
        assert_eq!(prox_group_l1(&u, 0.0, 0.0), u.to_vec());
        // soft → (2, 0, 0), norm 2, shrink by (2 − 1)/2.
        assert_eq!(
            prox_group_l1(&[3.0, -1.0, 0.5], 1.0, 1.0),
            vec![1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn objective_examples() {
        let y = lcg(6, 3, 1);
        let x = lcg(6, 4, 2);
        let zero = Matrix::zeros(4, 3);
        assert_eq!(
            objective(&x, &y, &zero, 0.3, 0.2).unwrap(),
            frobenius_sq(&y)
        );
        assert_eq!(
            objective(&y, &y, &Matrix::identity(3), 0.0, 0.0).unwrap(),
            0.0
        );
        assert!(objective(&x, &y, &Matrix::zeros(3, 3), 0.0, 0.0).is_err());
    }

    #[test]
    fn objective_matches_termwise_assembly() {
        let x = lcg(10, 4, 3);
        let y = lcg(10, 3, 4);
        let b = lcg(4, 3, 5);
        let mut loss = 0.0;
        for i in 0..10 {
            for j in 0..3 {
                let mut pred = 0.0;
                for p in 0..4 {
                    pred += x.get(i, p) * b.get(p, j);
                }
                loss += (y.get(i, j) - pred).powi(2);
            }
        }
        let mut group = 0.0;
        let mut l1 = 0.0;
        for p in 0..4 {
            let mut sq = 0.0;
            for j in 0..3 {
                sq += b.get(p, j).powi(2);
                l1 += b.get(p, j).abs();
            }
            group += sq.sqrt();
        }
        let expected = loss + 0.2 * group + 0.2 * l1;
        let got = objective(&x, &y, &b, 0.2, 0.2).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn gradient_examples() {
        let x = lcg(5, 3, 6);
        let b = lcg(3, 2, 7);
        let y = matmul(&x, &b).unwrap();
        let g = loss_gradient(&x, &y, &b).unwrap();
        assert!(g.as_slice().iter().all(|v| v.abs() < 1e-12));

        let g = loss_gradient(&Matrix::identity(3), &Matrix::zeros(3, 2), &b).unwrap();
        assert_eq!(g, b.scale(2.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = lcg(7, 3, 8);
        let y = lcg(7, 2, 9);
        let b = lcg(3, 2, 10);
        let g = loss_gradient(&x, &y, &b).unwrap();
        let h = 1e-6;
        for p in 0..3 {
            for j in 0..2 {
                let mut plus = b.clone();
                plus.set(p, j, b.get(p, j) + h);
                let mut minus = b.clone();
                minus.set(p, j, b.get(p, j) - h);
                let fd = (objective(&x, &y, &plus, 0.0, 0.0).unwrap()
                    - objective(&x, &y, &minus, 0.0, 0.0).unwrap())
                    / (2.0 * h);
                assert!((fd - g.get(p, j)).abs() <= 1e-5 * g.get(p, j).abs().max(1.0));
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        for bad in [
            SolverConfig {
                lambda1: -1.0,
                ..Default::default()
            },
            SolverConfig {
                tol: 0.0,
                ..Default::default()
            },
            SolverConfig {
                alpha_min: 2.0,
                alpha_max: 1.0,
                ..Default::default()
            },
            SolverConfig {
                backtrack_factor: 1.0,
                ..Default::default()
            },
            SolverConfig {
                max_iter: 0,
                ..Default::default()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn kill_lambda_examples() {
        // Orthogonal columns: XᵀY = 0.
        let x = Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(kill_lambda(&x, &y, 0.0).unwrap(), 0.0);

        let x = lcg(10, 4, 11);
        let y = lcg(10, 4, 12);
        let xty = t_matmul(&x, &y).unwrap();
        let max = xty.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(kill_lambda(&x, &y, 2.0 * max).unwrap(), 0.0);
    }

    #[test]
    fn kill_lambda_is_sharp_for_solver() {
        let x = lcg(10, 4, 13);
        let y = lcg(10, 4, 14);
        let kill = kill_lambda(&x, &y, 0.0).unwrap();
        let above = sparsa_fit(&x, &y, &SolverConfig::with_lambdas(1.01 * kill, 0.0)).unwrap();
        assert!(above.support.is_empty());
        assert_eq!(above.coef, Matrix::zeros(4, 4));
        let below = sparsa_fit(&x, &y, &SolverConfig::with_lambdas(0.5 * kill, 0.0)).unwrap();
        assert!(!below.support.is_empty());
    }

    #[test]
    fn unregularized_self_regression_reaches_zero() {
        let y = lcg(30, 8, 15);
        let fit = sparsa_fit(&y, &y, &SolverConfig::with_lambdas(0.0, 0.0)).unwrap();
        assert!(fit.objective() <= 1e-8, "{}", fit.objective());
    }

    #[test]
    fn support_rows_are_exactly_nonzero() {
        let y = lcg(20, 6, 16);
        let kill = kill_lambda(&y, &y, 0.1).unwrap();
        let fit = sparsa_fit(&y, &y, &SolverConfig::with_lambdas(0.6 * kill, 0.1)).unwrap();
        for g in 0..6 {
            let zero_row = fit.coef.row(g).iter().all(|v| *v == 0.0);
            assert_eq!(zero_row, !fit.support.contains(&g));
        }
        assert!(fit.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn diverged_on_non_finite_objective() {
        let x = Matrix::from_rows(&[vec![1e200], vec![1e200]]).unwrap();
        let y = Matrix::from_rows(&[vec![1e200], vec![-1e200]]).unwrap();
        assert!(matches!(
            sparsa_fit(&x, &y, &SolverConfig::default()),
            Err(Error::Diverged(_))
        ));
    }

    proptest! {
        #[test]
        fn prox_is_nonexpansive(
            u in prop::collection::vec(-5.0f64..5.0, 6),
            v in prop::collection::vec(-5.0f64..5.0, 6),
            tau1 in 0.0f64..3.0,
            tau2 in 0.0f64..3.0,
        ) {
            let pu = prox_group_l1(&u, tau1, tau2);
            let pv = prox_group_l1(&v, tau1, tau2);
            let d_out: f64 = pu.iter().zip(&pv).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let d_in: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prop_assert!(d_out <= d_in + 1e-12);
        }

        #[test]
        fn prox_zero_iff_soft_norm_below_threshold(
            u in prop::collection::vec(-5.0f64..5.0, 5),
            tau1 in 0.0f64..4.0,
            tau2 in 0.0f64..2.0,
        ) {
            let soft: Vec<f64> = u.iter().map(|v| soft_threshold(*v, tau2)).collect();
            let out = prox_group_l1(&u, tau1, tau2);
            prop_assert_eq!(out.iter().all(|v| *v == 0.0), l2_norm(&soft) <= tau1);
        }
    }
}
