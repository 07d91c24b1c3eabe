//! Landmark output selection for multi-output prediction.
//!
//! A small subset of output coordinates (the landmarks) is chosen by a
//! row-sparse least-squares regression of the output matrix on itself. The
//! remaining outputs are predicted as sparse linear combinations of the
//! landmarks, and only the landmarks are modeled as functions of the input.

pub mod error;
pub mod matrix;
pub mod solver;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub mod baselines;
pub mod dataset;
pub mod document;
pub mod experiments;
pub mod landmark;
pub mod linear;
pub mod rng;
