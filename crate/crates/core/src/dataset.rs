use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(Task::Regression),
            "classification" => Ok(Task::Classification),
            other => Err(Error::InvalidConfig(format!(
                "unknown task {other:?} (expected regression or classification)"
            ))),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
        })
    }
}

/// Paired inputs `x` (n×d) and outputs `y` (n×k).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Matrix,
    pub task: Task,
}

impl Dataset {
    pub fn new(x: Matrix, y: Matrix, task: Task) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::InvalidDataset(format!(
                "X has {} rows but Y has {}",
                x.rows(),
                y.rows()
            )));
        }
        if task == Task::Classification {
            if let Some(pos) = y.as_slice().iter().position(|v| *v != 0.0 && *v != 1.0) {
                return Err(Error::InvalidDataset(format!(
                    "classification labels must be 0 or 1; found {} at ({}, {})",
                    y.as_slice()[pos],
                    pos / y.cols(),
                    pos % y.cols()
                )));
            }
        }
        Ok(Dataset { x, y, task })
    }

    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn n_outputs(&self) -> usize {
        self.y.cols()
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(rows),
            y: self.y.select_rows(rows),
            task: self.task,
        }
    }
}
