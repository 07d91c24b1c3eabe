//! Empirical landmark support recovery as a function of sample size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{cholesky, l2_norm, spectral_norm_sq, Matrix};
use crate::rng::{normal_matrix, stream, Rng};
use crate::solver::{sparsa_fit, SolverConfig};

use super::synthetic::{fill_dependents, planted_coefficient};

/// `λ_max(ζᵀ Σ⁻¹ ζ)` where ζ is `rows` with each row scaled to unit norm.
pub fn support_overlap_phi(rows: &Matrix, sigma_ss: &Matrix) -> Result<f64> {
    let s = rows.rows();
    if sigma_ss.shape() != (s, s) {
        return Err(Error::shapes(
            "support_overlap_phi",
            rows.shape(),
            sigma_ss.shape(),
        ));
    }
    for i in 0..s {
        for j in 0..i {
            let (a, b) = (sigma_ss.get(i, j), sigma_ss.get(j, i));
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::InvalidConfig("covariance is not symmetric".into()));
            }
        }
    }
    let mut zeta = rows.clone();
    for i in 0..s {
        let norm = l2_norm(zeta.row(i));
        if norm == 0.0 {
            return Err(Error::InvalidConfig(format!("planted row {i} is zero")));
        }
        zeta.row_mut(i).iter_mut().for_each(|v| *v /= norm);
    }
    // With Σ = LLᵀ: ζᵀΣ⁻¹ζ = (L⁻¹ζ)ᵀ(L⁻¹ζ), so its top eigenvalue is ‖L⁻¹ζ‖₂².
    let l = cholesky(sigma_ss).map_err(|_| Error::Singular("support_overlap_phi"))?;
    let whitened = forward_substitute(&l, &zeta);
    Ok(spectral_norm_sq(&whitened))
}

fn forward_substitute(l: &Matrix, b: &Matrix) -> Matrix {
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..l.rows() {
            let mut v = x.get(i, c);
            for p in 0..i {
                v -= l.get(i, p) * x.get(p, c);
            }
            x.set(i, c, v / l.get(i, i));
        }
    }
    x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub k: usize,
    pub s: usize,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    /// Noise on the dependent outputs.
    pub sigma: f64,
    pub seed: u64,
    /// `λ₁ = lambda_scale·√(n·log k)`: the `√(log k / n)` rate applied to
    /// the unnormalized (sum over samples) squared loss.
    pub lambda_scale: f64,
}

impl RecoveryConfig {
    pub fn new(
        k: usize,
        s: usize,
        n_grid: Vec<usize>,
        trials: usize,
        sigma: f64,
        seed: u64,
    ) -> Self {
        RecoveryConfig {
            k,
            s,
            n_grid,
            trials,
            sigma,
            seed,
            lambda_scale: DEFAULT_LAMBDA_SCALE,
        }
    }

    pub fn lambda1(&self, n: usize) -> f64 {
        self.lambda_scale * (n as f64 * (self.k as f64).ln()).sqrt()
    }
}

pub const DEFAULT_LAMBDA_SCALE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub recovery_rate: Vec<f64>,
    /// Largest overlap diagnostic over the planted models of all trials.
    pub phi_star: f64,
}

/// Self-regression rows of a planted model: landmark i is `e_i` plus its
/// unit-norm cross weights on every dependent output.
fn planted_model(k: usize, s: usize, rng: &mut Rng) -> Matrix {
    let mut a = Matrix::zeros(k, k);
    for i in 0..s {
        let weights: Vec<f64> = (s..k).map(|_| planted_coefficient(rng)).collect();
        let norm = l2_norm(&weights);
        for (j, w) in weights.iter().enumerate() {
            a.set(i, s + j, w / norm);
        }
    }
    a
}

pub fn recovery_experiment(config: &RecoveryConfig) -> Result<RecoveryResult> {
    let (k, s) = (config.k, config.s);
    if s == 0 || s >= k {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= s < k, got s={s} k={k}"
        )));
    }
    if config.trials == 0 || config.n_grid.is_empty() {
        return Err(Error::InvalidConfig(
            "need at least one trial and one sample size".into(),
        ));
    }
    if config.n_grid.windows(2).any(|w| w[0] >= w[1]) || config.n_grid[0] == 0 {
        return Err(Error::InvalidConfig(
            "n_grid must be positive and ascending".into(),
        ));
    }

    let planted: Vec<Matrix> = (0..config.trials)
        .map(|t| planted_model(k, s, &mut stream(config.seed, &[1, t as u64])))
        .collect();
    let mut phi_star: f64 = 0.0;
    for a in &planted {
        let rows = Matrix::from_fn(s, k, |i, j| if i == j { 1.0 } else { a.get(i, j) });
        phi_star = phi_star.max(support_overlap_phi(&rows, &Matrix::identity(s))?);
    }

    let truth: Vec<usize> = (0..s).collect();
    let mut recovery_rate = Vec::with_capacity(config.n_grid.len());
    for (gi, &n) in config.n_grid.iter().enumerate() {
        let solver = SolverConfig::with_lambdas(config.lambda1(n), 0.0);
        let mut hits = 0;
        for (t, a) in planted.iter().enumerate() {
            let mut rng = stream(config.seed, &[2, gi as u64, t as u64]);
            let landmarks = normal_matrix(n, s, 1.0, &mut rng);
            let mut y = Matrix::zeros(n, k);
            for r in 0..n {
                y.row_mut(r)[..s].copy_from_slice(landmarks.row(r));
            }
            fill_dependents(&mut y, a, s, config.sigma, &mut rng);
            let fit = sparsa_fit(&y, &y, &solver)?;
            if fit.support == truth {
                hits += 1;
            }
        }
        recovery_rate.push(hits as f64 / config.trials as f64);
    }
    Ok(RecoveryResult {
        n_grid: config.n_grid.clone(),
        trials: config.trials,
        recovery_rate,
        phi_star,
    })
}
