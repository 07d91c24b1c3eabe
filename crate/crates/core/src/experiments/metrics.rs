//! Multi-label and regression evaluation metrics, example-averaged.

use serde::{Deserialize, Serialize};

use crate::dataset::Task;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub hamming: Option<f64>,
    pub f1: Option<f64>,
    pub mse: Option<f64>,
}

impl MetricsReport {
    pub fn evaluate(task: Task, truth: &Matrix, predicted: &Matrix) -> Result<Self> {
        Ok(match task {
            Task::Classification => MetricsReport {
                hamming: Some(hamming_loss(truth, predicted)?),
                f1: Some(f1_score(truth, predicted)?),
                mse: None,
            },
            Task::Regression => MetricsReport {
                mse: Some(mse(truth, predicted)?),
                ..Default::default()
            },
        })
    }

    /// `(metric, value)` pairs for the metrics present.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        [
            ("hamming", self.hamming),
            ("f1", self.f1),
            ("mse", self.mse),
        ]
        .into_iter()
        .filter_map(|(name, v)| v.map(|v| (name, v)))
        .collect()
    }
}

fn check_pair(truth: &Matrix, predicted: &Matrix) -> Result<()> {
    if truth.shape() != predicted.shape() {
        return Err(Error::shapes("metric", truth.shape(), predicted.shape()));
    }
    Ok(())
}

fn check_binary(m: &Matrix, which: &str) -> Result<()> {
    if let Some(pos) = m.as_slice().iter().position(|v| *v != 0.0 && *v != 1.0) {
        return Err(Error::InvalidDataset(format!(
            "{which} is not binary: {} at ({}, {})",
            m.as_slice()[pos],
            pos / m.cols(),
            pos % m.cols()
        )));
    }
    Ok(())
}

/// Per row `(yᵀ1 + ŷᵀ1 − 2yᵀŷ)/k`, averaged over rows.
pub fn hamming_loss(truth: &Matrix, predicted: &Matrix) -> Result<f64> {
    check_pair(truth, predicted)?;
    check_binary(truth, "truth")?;
    check_binary(predicted, "prediction")?;
    let k = truth.cols() as f64;
    let total: f64 = (0..truth.rows())
        .map(|r| {
            let (y, yh) = (truth.row(r), predicted.row(r));
            let sy: f64 = y.iter().sum();
            let syh: f64 = yh.iter().sum();
            let both: f64 = y.iter().zip(yh).map(|(a, b)| a * b).sum();
            (sy + syh - 2.0 * both) / k
        })
        .sum();
    Ok(total / truth.rows() as f64)
}

/// Per row `2yᵀŷ / (Σy + Σŷ)`, averaged over rows. A row where both sides
/// are empty scores 1.
pub fn f1_score(truth: &Matrix, predicted: &Matrix) -> Result<f64> {
    check_pair(truth, predicted)?;
    check_binary(truth, "truth")?;
    check_binary(predicted, "prediction")?;
    let total: f64 = (0..truth.rows())
        .map(|r| {
            let (y, yh) = (truth.row(r), predicted.row(r));
            let denom: f64 = y.iter().sum::<f64>() + yh.iter().sum::<f64>();
            if denom == 0.0 {
                1.0
            } else {
                2.0 * y.iter().zip(yh).map(|(a, b)| a * b).sum::<f64>() / denom
            }
        })
        .sum();
    Ok(total / truth.rows() as f64)
}

/// Mean squared entry difference over all `m·k` entries.
pub fn mse(truth: &Matrix, predicted: &Matrix) -> Result<f64> {
    check_pair(truth, predicted)?;
    let sum: f64 = truth
        .as_slice()
        .iter()
        .zip(predicted.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / truth.as_slice().len() as f64)
}
