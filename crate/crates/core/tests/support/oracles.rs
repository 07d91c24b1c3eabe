//! Independent reference computations used by the integration tests and the
//! acceptance run. Nothing here calls the solver code it is checking.

#![allow(dead_code)]

use landmark_core::matrix::Matrix;
use landmark_core::rng::{normal, stream, Rng};
use rand::Rng as _;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Prox of `τ₁‖z‖₂ + τ₂‖z‖₁` through its dual: `z = u − a − b` where
/// `(a, b)` maximizes the dual over the product of the balls `‖a‖₂ ≤ τ₁` and
/// `‖b‖∞ ≤ τ₂`. Projected gradient ascent with diminishing step `1/log₂(t+2)`.
pub fn prox_by_dual_projection(u: &[f64], tau1: f64, tau2: f64, iterations: usize) -> Vec<f64> {
    let mut a = vec![0.0; u.len()];
    let mut b = vec![0.0; u.len()];
    let mut z = u.to_vec();
    for t in 0..iterations {
        let step = 1.0 / (t as f64 + 2.0).log2();
        a.iter_mut().zip(&z).for_each(|(ai, zi)| *ai += step * zi);
        let an = norm(&a);
        if an > tau1 {
            a.iter_mut().for_each(|ai| *ai *= tau1 / an);
        }
        b.iter_mut()
            .zip(&z)
            .for_each(|(bi, zi)| *bi = (*bi + step * zi).clamp(-tau2, tau2));
        for i in 0..z.len() {
            z[i] = u[i] - a[i] - b[i];
        }
    }
    z
}

/// `‖Y − XB‖_F²` by explicit loops.
pub fn squared_loss(x: &Matrix, y: &Matrix, b: &Matrix) -> f64 {
    let mut total = 0.0;
    for r in 0..x.rows() {
        for c in 0..y.cols() {
            let fit: f64 = (0..x.cols()).map(|p| x.get(r, p) * b.get(p, c)).sum();
            total += (y.get(r, c) - fit).powi(2);
        }
    }
    total
}

pub fn penalized_objective(x: &Matrix, y: &Matrix, b: &Matrix, lambda1: f64, lambda2: f64) -> f64 {
    let group: f64 = (0..b.rows()).map(|g| norm(b.row(g))).sum();
    let l1: f64 = b.as_slice().iter().map(|v| v.abs()).sum();
    squared_loss(x, y, b) + lambda1 * group + lambda2 * l1
}

/// Central differences of the squared loss with step `h`.
pub fn finite_difference_gradient(x: &Matrix, y: &Matrix, b: &Matrix, h: f64) -> Matrix {
    Matrix::from_fn(b.rows(), b.cols(), |i, j| {
        let mut up = b.clone();
        up.set(i, j, b.get(i, j) + h);
        let mut down = b.clone();
        down.set(i, j, b.get(i, j) - h);
        (squared_loss(x, y, &up) - squared_loss(x, y, &down)) / (2.0 * h)
    })
}

/// Cyclic exact minimization over one row of `B` at a time, until the
/// relative change of the objective over a full sweep is below `tol`.
pub fn coordinate_descent(
    x: &Matrix,
    y: &Matrix,
    lambda1: f64,
    lambda2: f64,
    tol: f64,
) -> (Matrix, f64) {
    let (n, d, k) = (x.rows(), x.cols(), y.cols());
    let mut b = Matrix::zeros(d, k);
    // Residual Y − XB, kept in sync with B.
    let mut r = y.clone();
    let mut obj = penalized_objective(x, y, &b, lambda1, lambda2);
    for _ in 0..1_000_000 {
        for g in 0..d {
            let xg: Vec<f64> = (0..n).map(|i| x.get(i, g)).collect();
            let xx: f64 = xg.iter().map(|v| v * v).sum();
            if xx == 0.0 {
                continue;
            }
            // Partial residual with row g removed, projected on x_g.
            let c: Vec<f64> = (0..k)
                .map(|j| {
                    (0..n)
                        .map(|i| xg[i] * (r.get(i, j) + xg[i] * b.get(g, j)))
                        .sum::<f64>()
                })
                .collect();
            let mut h: Vec<f64> = c
                .iter()
                .map(|v| {
                    let u = v / xx;
                    let t = lambda2 / (2.0 * xx);
                    sign(u) * (u.abs() - t).max(0.0)
                })
                .collect();
            let hn = norm(&h);
            let t1 = lambda1 / (2.0 * xx);
            let factor = if hn > t1 { (hn - t1) / hn } else { 0.0 };
            h.iter_mut().for_each(|v| *v *= factor);
            for j in 0..k {
                let delta = h[j] - b.get(g, j);
                if delta != 0.0 {
                    for i in 0..n {
                        r.set(i, j, r.get(i, j) - xg[i] * delta);
                    }
                    b.set(g, j, h[j]);
                }
            }
        }
        let next = penalized_objective(x, y, &b, lambda1, lambda2);
        let done = (obj - next).abs() <= tol * obj.abs().max(f64::MIN_POSITIVE);
        obj = next;
        if done {
            break;
        }
    }
    (b, obj)
}

/// `n × k` outputs whose last `k − s` columns are sparse combinations of the
/// first `s`, plus noise.
pub fn planted_self_regression(n: usize, k: usize, s: usize, noise: f64, seed: u64) -> Matrix {
    let mut rng: Rng = stream(seed, &[900]);
    let weights = Matrix::from_fn(s, k - s, |_, _| {
        if rng.random::<f64>() < 0.5 {
            0.0
        } else {
            let m = rng.random_range(0.5..1.5);
            if rng.random::<bool>() {
                m
            } else {
                -m
            }
        }
    });
    let mut y = Matrix::zeros(n, k);
    for i in 0..n {
        for l in 0..s {
            y.set(i, l, normal(&mut rng));
        }
        for j in s..k {
            let v: f64 = (0..s).map(|l| y.get(i, l) * weights.get(l, j - s)).sum();
            y.set(i, j, v + noise * normal(&mut rng));
        }
    }
    y
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| normal(rng))
}
