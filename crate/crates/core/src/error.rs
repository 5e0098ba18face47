use thiserror::Error;

use crate::scalar::ScalarError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EchError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("unknown orbit id `{0}`")]
    UnknownOrbit(String),
    #[error("invalid orbit `{id}`: {reason}")]
    InvalidOrbit { id: String, reason: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl EchError {
    /// Stable machine-readable tag used in structured CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            EchError::Scalar(ScalarError::Ambiguous { .. })
            | EchError::Scalar(ScalarError::AmbiguousComparison(..)) => "ambiguous",
            EchError::Scalar(ScalarError::DivisionByZero) => "division_by_zero",
            EchError::Scalar(ScalarError::RadiusTooLarge(_)) => "radius_too_large",
            EchError::Scalar(ScalarError::Parse { .. }) => "parse",
            EchError::UnknownOrbit(_) => "unknown_orbit",
            EchError::InvalidOrbit { .. } => "invalid_orbit",
            EchError::InvalidInput(_) => "invalid_input",
            EchError::Precondition(_) => "precondition",
            EchError::DimensionMismatch(_) => "dimension_mismatch",
            EchError::Inconsistent(_) => "inconsistent",
            EchError::Degenerate(_) => "degenerate",
            EchError::Numerical(_) => "numerical",
        }
    }
}

pub type Result<T> = std::result::Result<T, EchError>;
