//! Synthetic benchmarks, evaluation metrics, cross-validation and the
//! support-recovery harness.

pub mod bench;
pub mod cv;
pub mod metrics;
pub mod recovery;
pub mod synthetic;

pub use cv::{
    cross_validate, cross_validate_by, cross_validate_with, landmark_grid, CvResult, GridCell,
    Metric,
};
pub use metrics::{f1_score, hamming_loss, mse, MetricsReport};
pub use recovery::{recovery_experiment, support_overlap_phi, RecoveryConfig, RecoveryResult};
pub use synthetic::{
    gen_ar1_returns, gen_synthetic_classification, gen_synthetic_regression, Planted,
    SyntheticData, SyntheticSpec,
};
