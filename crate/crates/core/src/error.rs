use thiserror::Error;

/// Errors raised by measure construction and the Brown measure computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("operation needs a {expected} measure")]
    WrongSupport { expected: &'static str },

    #[error("evaluation point {point} coincides with an atom")]
    PoleAtAtom { point: String },

    #[error("1 + psi(z) vanishes at z = {point}")]
    DegenerateDenominator { point: String },

    #[error("time must be positive and finite, got {0}")]
    NonpositiveTime(f64),

    #[error("a = {0} is an atom outside the support of v_t")]
    AtomDivision(f64),

    #[error("a = {0} lies outside the support (v_t(a) = 0)")]
    OutsideSupport(f64),

    #[error("theta = {0} lies outside U_t (r_t(theta) = 1)")]
    OutsideU(f64),

    #[error("radius must be positive, finite and different from 1, got {0}")]
    InvalidRadius(f64),

    #[error("T is undefined at lambda = 0")]
    ZeroLambda,

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("moment order {0} exceeds the supported maximum of 12")]
    OrderTooLarge(usize),

    #[error("quadrature did not converge on [{lo}, {hi}] after {levels} refinements")]
    QuadratureNonconvergence { lo: f64, hi: f64, levels: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::QuadratureNonconvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
