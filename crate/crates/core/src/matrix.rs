//! Dense row-major matrices and the closed-form solvers built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of Jacobi sweeps before [`svd`] gives up.
pub const SVD_MAX_SWEEPS: usize = 100;

/// Dense real matrix stored row-major. Every entry is finite and both
/// dimensions are positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        Matrix::from_vec(raw.rows, raw.cols, raw.data)
    }
}

impl Matrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::InvalidMatrix(format!("ragged row {i}")));
        }
        Matrix::from_vec(n, m, rows.concat())
    }

    /// Builds a matrix from a generator. Panics on zero dimensions or a
    /// non-finite value, which are programming errors at internal call sites.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix::from_vec(rows, cols, data).expect("generator produced an invalid matrix")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "zero-sized matrix");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Columns `idx` in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().map(|v| f(*v)).collect(),
        )
        .expect("map produced a non-finite entry")
    }

    pub fn scale(&self, c: f64) -> Matrix {
        self.map(|v| v * c)
    }

    /// Like [`Matrix::scale`] but reports overflow instead of panicking.
    pub fn try_scale(&self, c: f64) -> Result<Matrix> {
        Matrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * c).collect(),
        )
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Matrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::shapes(op, self.shape(), other.shape()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Matrix::from_vec(self.rows, self.cols, data)
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Matrix) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (m, v) in means.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        let n = self.rows as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }

    /// Subtracts `offsets[j]` from column j.
    pub fn center_columns(&self, offsets: &[f64]) -> Matrix {
        assert_eq!(offsets.len(), self.cols);
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - offsets[j])
    }

    /// Adds `offsets[j]` to column j.
    pub fn shift_columns(&self, offsets: &[f64]) -> Matrix {
        assert_eq!(offsets.len(), self.cols);
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + offsets[j])
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::shapes("hstack", self.shape(), other.shape()));
        }
        Ok(Matrix::from_fn(
            self.rows,
            self.cols + other.cols,
            |i, j| {
                if j < self.cols {
                    self.get(i, j)
                } else {
                    other.get(i, j - self.cols)
                }
            },
        ))
    }
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::shapes("matmul", a.shape(), b.shape()));
    }
    let mut out = vec![0.0; a.rows * b.cols];
    for i in 0..a.rows {
        let out_row = &mut out[i * b.cols..(i + 1) * b.cols];
        for (l, &av) in a.row(i).iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            for (o, bv) in out_row.iter_mut().zip(b.row(l)) {
                *o += av * bv;
            }
        }
    }
    Matrix::from_vec(a.rows, b.cols, out)
}

/// `aᵀ·b` without materializing the transpose.
pub fn t_matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows {
        return Err(Error::shapes("t_matmul", a.shape(), b.shape()));
    }
    let mut out = vec![0.0; a.cols * b.cols];
    for l in 0..a.rows {
        let b_row = b.row(l);
        for (i, &av) in a.row(l).iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            for (o, bv) in out[i * b.cols..(i + 1) * b.cols].iter_mut().zip(b_row) {
                *o += av * bv;
            }
        }
    }
    Matrix::from_vec(a.cols, b.cols, out)
}

pub fn frobenius_sq(m: &Matrix) -> f64 {
    m.data.iter().map(|v| v * v).sum()
}

pub fn row_l2_norms(m: &Matrix) -> Vec<f64> {
    (0..m.rows).map(|i| l2_norm(m.row(i))).collect()
}

pub fn elementwise_l1(m: &Matrix) -> f64 {
    m.data.iter().map(|v| v.abs()).sum()
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::shapes("cholesky", a.shape(), a.shape()));
    }
    let scale = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
    let floor = scale * n as f64 * f64::EPSILON;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for p in 0..j {
            d -= l.get(j, p) * l.get(j, p);
        }
        if d <= floor {
            return Err(Error::Singular("cholesky"));
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for p in 0..j {
                s -= l.get(i, p) * l.get(j, p);
            }
            l.set(i, j, s / d);
        }
    }
    Ok(l)
}

/// Solves `L·Lᵀ·X = B` given the Cholesky factor `L`.
pub fn cholesky_solve(l: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = l.rows;
    if b.rows != n {
        return Err(Error::shapes("cholesky_solve", l.shape(), b.shape()));
    }
    let mut x = b.clone();
    for c in 0..b.cols {
        for i in 0..n {
            let mut s = x.get(i, c);
            for p in 0..i {
                s -= l.get(i, p) * x.get(p, c);
            }
            x.set(i, c, s / l.get(i, i));
        }
        for i in (0..n).rev() {
            let mut s = x.get(i, c);
            for p in i + 1..n {
                s -= l.get(p, i) * x.get(p, c);
            }
            x.set(i, c, s / l.get(i, i));
        }
    }
    Ok(x)
}

/// Minimizes `‖Y − XW‖_F² + λ‖W‖_F²` through the normal equations.
pub fn ridge_solve(x: &Matrix, y: &Matrix, lambda: f64) -> Result<Matrix> {
    if x.rows != y.rows {
        return Err(Error::shapes("ridge_solve", x.shape(), y.shape()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "ridge penalty must be >= 0, got {lambda}"
        )));
    }
    let mut gram = t_matmul(x, x)?;
    for i in 0..gram.rows {
        let v = gram.get(i, i);
        gram.set(i, i, v + lambda);
    }
    let rhs = t_matmul(x, y)?;
    let l = cholesky(&gram).map_err(|_| Error::Singular("ridge_solve"))?;
    cholesky_solve(&l, &rhs)
}

/// Thin singular value decomposition `m = U·diag(s)·Vᵀ`.
///
/// `u` is `rows × r` and `v` is `cols × r` with `r = min(rows, cols)`; both
/// have orthonormal columns (completed arbitrarily for zero singular values)
/// and `s` is nonincreasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let us = Matrix::from_fn(self.u.rows, self.s.len(), |i, j| {
            self.u.get(i, j) * self.s[j]
        });
        matmul(&us, &self.v.transpose()).expect("svd factors are conformant")
    }

    pub fn rank(&self) -> usize {
        self.s.iter().filter(|v| **v > 0.0).count()
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(m: &Matrix) -> Result<Svd> {
    if m.rows < m.cols {
        let t = svd(&m.transpose())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (rows, n) = m.shape();
    // Work column-major: cols[j] is column j of the evolving U·Σ.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let eps = 1e-15;
    let mut converged = false;
    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a * b).sum();
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence(SVD_MAX_SWEEPS));
    }

    let norms: Vec<f64> = cols.iter().map(|c| l2_norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| norms[*b].total_cmp(&norms[*a]));
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    let tiny = max_norm * rows.max(n) as f64 * f64::EPSILON;

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut v_cols = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for &j in &order {
        v_cols.push(v[j].clone());
        if norms[j] > tiny {
            s.push(norms[j]);
            u_cols.push(cols[j].iter().map(|x| x / norms[j]).collect());
        } else {
            s.push(0.0);
            pending.push(u_cols.len());
            u_cols.push(Vec::new());
        }
    }
    complete_basis(&mut u_cols, &pending, rows);

    let u = Matrix::from_fn(rows, n, |i, j| u_cols[j][i]);
    let vm = Matrix::from_fn(n, n, |i, j| v_cols[j][i]);
    Ok(Svd { u, s, v: vm })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Fills the empty slots `pending` of `basis` with unit vectors orthogonal
/// to every other column, via Gram-Schmidt against the standard basis.
fn complete_basis(basis: &mut [Vec<f64>], pending: &[usize], dim: usize) {
    let mut candidate = 0;
    for &slot in pending {
        loop {
            assert!(candidate < dim, "cannot complete orthonormal basis");
            let mut e = vec![0.0; dim];
            e[candidate] = 1.0;
            candidate += 1;
            // Two passes of classical Gram-Schmidt for stability.
            for _ in 0..2 {
                for other in basis.iter().filter(|b| !b.is_empty()) {
                    let proj: f64 = other.iter().zip(&e).map(|(a, b)| a * b).sum();
                    e.iter_mut().zip(other).for_each(|(x, o)| *x -= proj * o);
                }
            }
            let norm = l2_norm(&e);
            if norm > 1e-6 {
                e.iter_mut().for_each(|x| *x /= norm);
                basis[slot] = e;
                break;
            }
        }
    }
}

/// Largest eigenvalue of the symmetric positive-semidefinite `mᵀm`, i.e.
/// the squared spectral norm of `m`, by power iteration.
pub fn spectral_norm_sq(m: &Matrix) -> f64 {
    let n = m.cols;
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.01 * ((i * 7919) % 101) as f64)
        .collect();
    let mut estimate = 0.0;
    for _ in 0..500 {
        let norm = l2_norm(&v);
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let mv: Vec<f64> = (0..m.rows)
            .map(|i| m.row(i).iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let mut next = vec![0.0; n];
        for (i, w) in mv.iter().enumerate() {
            next.iter_mut().zip(m.row(i)).for_each(|(o, a)| *o += w * a);
        }
        let new_estimate: f64 = next.iter().zip(&v).map(|(a, b)| a * b).sum();
        v = next;
        if (new_estimate - estimate).abs() <= 1e-10 * new_estimate {
            return new_estimate;
        }
        estimate = new_estimate;
    }
    estimate
}
