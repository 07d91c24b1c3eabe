//! Landmark-structured synthetic data.
//!
//! Outputs `0..s` are the landmarks, linear in the inputs. Every other output
//! is a sparse combination of landmarks plus Gaussian noise.

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::matrix::{matmul, Matrix};
use crate::rng::{normal, normal_matrix, stream, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Output dimension.
    pub k: usize,
    /// Input dimension.
    pub d: usize,
    /// Number of landmarks.
    pub s: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub sigma_landmark: f64,
    pub sigma_dependent: f64,
    /// Fraction of the `k − s` dependent outputs each landmark feeds.
    pub within_row_density: f64,
    pub seed: u64,
}

pub const DEFAULT_SIGMA_LANDMARK: f64 = 1.0;
pub const DEFAULT_SIGMA_DEPENDENT: f64 = 0.1;
pub const DEFAULT_DENSITY: f64 = 0.3;

impl SyntheticSpec {
    pub fn new(k: usize, d: usize, s: usize, n_train: usize, n_test: usize, seed: u64) -> Self {
        SyntheticSpec {
            k,
            d,
            s,
            n_train,
            n_test,
            sigma_landmark: DEFAULT_SIGMA_LANDMARK,
            sigma_dependent: DEFAULT_SIGMA_DEPENDENT,
            within_row_density: DEFAULT_DENSITY,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.s == 0 || self.s > self.k {
            return bad(format!("need 1 <= s <= k, got s={} k={}", self.s, self.k));
        }
        if self.d == 0 || self.n_train == 0 || self.n_test == 0 {
            return bad("d, n_train and n_test must be positive".into());
        }
        if !(self.sigma_landmark >= 0.0 && self.sigma_dependent >= 0.0)
            || !self.sigma_landmark.is_finite()
            || !self.sigma_dependent.is_finite()
        {
            return bad("noise levels must be finite and >= 0".into());
        }
        if !(self.within_row_density > 0.0 && self.within_row_density <= 1.0) {
            return bad(format!(
                "within_row_density must be in (0, 1], got {}",
                self.within_row_density
            ));
        }
        Ok(())
    }

    /// Nonzeros per planted row: at least one when there are dependents.
    pub fn nonzeros_per_row(&self) -> usize {
        let dependents = self.k - self.s;
        if dependents == 0 {
            return 0;
        }
        ((self.within_row_density * dependents as f64).round() as usize).clamp(1, dependents)
    }
}

/// Ground truth of a synthetic draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Planted {
    /// k × k; row `i < s` holds landmark i's weights on the dependent
    /// outputs, every other entry is zero.
    pub a_star: Matrix,
    /// d × s input → landmark weights.
    pub w_star: Matrix,
    pub landmarks: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub train: Dataset,
    pub test: Dataset,
    pub planted: Planted,
}

/// Magnitude uniform on [0.5, 1.5] with a fair random sign.
pub(crate) fn planted_coefficient(rng: &mut Rng) -> f64 {
    let magnitude = rng.random_range(0.5..=1.5);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

/// Planted cross block: `nonzeros` entries per landmark row placed among
/// the dependent columns `s..k`.
pub(crate) fn planted_rows(k: usize, s: usize, nonzeros: usize, rng: &mut Rng) -> Matrix {
    let mut a = Matrix::zeros(k, k);
    for i in 0..s {
        let mut positions = sample(rng, k - s, nonzeros).into_vec();
        positions.sort_unstable();
        for p in positions {
            a.set(i, s + p, planted_coefficient(rng));
        }
    }
    a
}

/// Fills the dependent columns `s..k` of `y` from its landmark columns:
/// `y_dep = y_L·A*_{L,dep} + σ·noise`.
pub(crate) fn fill_dependents(
    y: &mut Matrix,
    a_star: &Matrix,
    s: usize,
    sigma: f64,
    rng: &mut Rng,
) {
    let k = y.cols();
    for r in 0..y.rows() {
        for j in s..k {
            let mut v = 0.0;
            for i in 0..s {
                v += y.get(r, i) * a_star.get(i, j);
            }
            y.set(r, j, v + sigma * normal(rng));
        }
    }
}

fn draw_sample(
    spec: &SyntheticSpec,
    planted: &Planted,
    n: usize,
    rng: &mut Rng,
) -> Result<(Matrix, Matrix)> {
    let x = normal_matrix(n, spec.d, 1.0, rng);
    let y_l = matmul(&x, &planted.w_star)?;
    let mut y = Matrix::zeros(n, spec.k);
    for r in 0..n {
        for i in 0..spec.s {
            y.set(r, i, y_l.get(r, i) + spec.sigma_landmark * normal(rng));
        }
    }
    fill_dependents(&mut y, &planted.a_star, spec.s, spec.sigma_dependent, rng);
    Ok((x, y))
}

pub fn gen_synthetic_regression(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut model_rng = stream(spec.seed, &[0]);
    let w_star = normal_matrix(spec.d, spec.s, 1.0 / (spec.d as f64).sqrt(), &mut model_rng);
    let a_star = planted_rows(spec.k, spec.s, spec.nonzeros_per_row(), &mut model_rng);
    let planted = Planted {
        a_star,
        w_star,
        landmarks: (0..spec.s).collect(),
    };
    let (x_train, y_train) =
        draw_sample(spec, &planted, spec.n_train, &mut stream(spec.seed, &[1]))?;
    let (x_test, y_test) = draw_sample(spec, &planted, spec.n_test, &mut stream(spec.seed, &[2]))?;
    Ok(SyntheticData {
        train: Dataset::new(x_train, y_train, Task::Regression)?,
        test: Dataset::new(x_test, y_test, Task::Regression)?,
        planted,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// The regression draw with every output binarized at its training median.
pub fn gen_synthetic_classification(spec: &SyntheticSpec) -> Result<SyntheticData> {
    let data = gen_synthetic_regression(spec)?;
    let medians: Vec<f64> = (0..spec.k)
        .map(|j| median(&mut data.train.y.column(j)))
        .collect();
    let binarize = |y: &Matrix| {
        Matrix::from_fn(y.rows(), y.cols(), |i, j| {
            (y.get(i, j) > medians[j]) as u8 as f64
        })
    };
    Ok(SyntheticData {
        train: Dataset::new(
            data.train.x.clone(),
            binarize(&data.train.y),
            Task::Classification,
        )?,
        test: Dataset::new(
            data.test.x.clone(),
            binarize(&data.test.y),
            Task::Classification,
        )?,
        planted: data.planted,
    })
}

/// Upper estimate of the spectral radius from `‖B^m‖_F^{1/m}` with
/// `m = 2^20`, computed by repeated squaring with renormalization.
pub fn spectral_radius_estimate(b: &Matrix) -> f64 {
    const SQUARINGS: i32 = 20;
    let mut m = b.clone();
    let mut log_scale = 0.0;
    for _ in 0..SQUARINGS {
        let norm = crate::matrix::frobenius_sq(&m).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let unit = m.scale(1.0 / norm);
        log_scale = 2.0 * (log_scale + norm.ln());
        m = matmul(&unit, &unit).expect("square matrix");
    }
    let norm = crate::matrix::frobenius_sq(&m).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    ((log_scale + norm.ln()) / 2f64.powi(SQUARINGS)).exp()
}

/// Gaussian `s × s` matrix rescaled to the requested spectral radius.
pub fn random_stable_transition(s: usize, radius: f64, rng: &mut Rng) -> Matrix {
    let b = normal_matrix(s, s, 1.0, rng);
    let current = spectral_radius_estimate(&b);
    if current == 0.0 {
        return b;
    }
    b.scale(radius / current)
}

/// One-step-ahead returns dataset from a vector AR(1) on the landmarks:
/// `y_t^L = B*·y_{t−1}^L + σ_L·ε`, dependents from the planted rows as in
/// [`gen_synthetic_regression`]. Row t of `x` holds all returns at time
/// t − 1 and row t of `y` those at time t.
pub fn gen_ar1_returns(
    spec: &SyntheticSpec,
    b_star: &Matrix,
    horizon: usize,
) -> Result<(Dataset, Planted)> {
    const BURN_IN: usize = 100;
    if b_star.shape() != (spec.s, spec.s) {
        return Err(Error::shapes(
            "transition matrix",
            b_star.shape(),
            (spec.s, spec.s),
        ));
    }
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be positive".into()));
    }
    let mut check = spec.clone();
    check.d = check.d.max(1);
    check.validate()?;
    let radius = spectral_radius_estimate(b_star);
    if radius >= 1.0 {
        return Err(Error::Unstable(radius));
    }

    let mut model_rng = stream(spec.seed, &[10]);
    let a_star = planted_rows(spec.k, spec.s, spec.nonzeros_per_row(), &mut model_rng);
    let mut rng = stream(spec.seed, &[11]);

    let total = BURN_IN + horizon + 1;
    let mut series = Matrix::zeros(total, spec.k);
    let mut prev = vec![0.0; spec.s];
    for t in 0..total {
        let next: Vec<f64> = (0..spec.s)
            .map(|i| {
                let ar: f64 = (0..spec.s).map(|p| b_star.get(i, p) * prev[p]).sum();
                ar + spec.sigma_landmark * normal(&mut rng)
            })
            .collect();
        for (i, v) in next.iter().enumerate() {
            series.set(t, i, *v);
        }
        prev = next;
    }
    fill_dependents(&mut series, &a_star, spec.s, spec.sigma_dependent, &mut rng);

    let x = Matrix::from_fn(horizon, spec.k, |t, j| series.get(BURN_IN + t, j));
    let y = Matrix::from_fn(horizon, spec.k, |t, j| series.get(BURN_IN + t + 1, j));
    let planted = Planted {
        a_star,
        w_star: b_star.transpose(),
        landmarks: (0..spec.s).collect(),
    };
    Ok((Dataset::new(x, y, Task::Regression)?, planted))
}
