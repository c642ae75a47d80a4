use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] brown_core::Error),

    #[error("eigenvalue solver failed: {0}")]
    EigenSolverFailure(String),

    #[error("mismatched model: {0}")]
    MismatchedModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed spectrum file: {0}")]
    MalformedSpectrum(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::EigenSolverFailure(_) => true,
            Error::Core(e) => e.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
