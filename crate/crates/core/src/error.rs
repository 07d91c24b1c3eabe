use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left} vs {right}")]
    DimensionMismatch {
        op: &'static str,
        left: String,
        right: String,
    },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("singular system in {0}; use a positive ridge penalty")]
    Singular(&'static str),

    #[error("svd did not converge after {0} sweeps")]
    SvdNoConvergence(usize),

    #[error("solver diverged at iteration {0}: non-finite objective")]
    Diverged(usize),

    #[error("empty landmark support; lower lambda1")]
    EmptySupport,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unstable transition matrix: spectral radius estimate {0:.4} >= 1")]
    Unstable(f64),

    #[error("no grid cell produced a finite validation score")]
    InfeasibleGrid,

    #[error("malformed model document: {0}")]
    MalformedDocument(String),

    #[error("unsupported schema version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
}

impl Error {
    pub(crate) fn shapes(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            op,
            left: format!("{}x{}", left.0, left.1),
            right: format!("{}x{}", right.0, right.1),
        }
    }
}
