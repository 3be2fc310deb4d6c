use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate index {index} out of range for dimension {dim}")]
    CoordinateOutOfRange { index: usize, dim: usize },

    #[error("polynomial is not sign-definite: coefficients of both signs present")]
    MixedSigns,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Exponent triple outside the regime where the Sobolev exponent is defined
    /// or outside the hypothesis window of the requested check.
    #[error("parameters out of window: {0}")]
    OutOfWindow(String),

    #[error("quadrature did not converge: {boxes} boxes used, last difference {last_difference:e} (tolerance {tol:e})")]
    NonConvergence {
        boxes: usize,
        last_difference: f64,
        tol: f64,
    },

    #[error("exact expansion budget exceeded: {terms} terms > {budget}")]
    ExpansionBudget { terms: usize, budget: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported schema version {0:?}")]
    SchemaVersion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::OutOfWindow(_) => 3,
            Error::NonConvergence { .. } => 4,
            _ => 2,
        }
    }
}
