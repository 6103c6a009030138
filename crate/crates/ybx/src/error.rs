use std::io;
use std::path::PathBuf;

use thiserror::Error;
use ybx_core::gaussian::GaussianError;
use ybx_core::network::NetworkError;
use ybx_core::operators::OperatorError;
use ybx_core::verify::VerifyError;
use ybx_core::weights::WeightError;
use ybx_core::TensorError;

#[derive(Debug, Error)]
pub enum YbxError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: not valid JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("extent mismatch in {what}: expected {expected:?}, got {got:?}")]
    Extent { what: String, expected: Vec<usize>, got: Vec<usize> },
    #[error("non-finite number at {0}")]
    NonFinite(String),
    #[error("cannot parse complex number `{0}`")]
    Complex(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

impl YbxError {
    /// Process exit status: 2 for usage errors, 3 for unreadable or malformed
    /// input files, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            YbxError::Usage(_) => 2,
            YbxError::Io { .. }
            | YbxError::Json { .. }
            | YbxError::Schema(_)
            | YbxError::Extent { .. }
            | YbxError::NonFinite(_)
            | YbxError::Complex(_) => 3,
            _ => 1,
        }
    }
}
