//! Finite-N random matrix models whose eigenvalues approximate the Brown
//! measures computed in `brown-core`, and CDF comparisons between the two.

pub mod alloc;
pub mod compare;
pub mod error;
pub mod linalg;
pub mod sample;
pub mod spectrum;

pub use compare::{compare_marginal, ComparisonReport, Marginal, ProfileRef};
pub use error::{Error, Result};
pub use sample::{
    sample_additive, sample_additive_many, sample_multiplicative, sample_multiplicative_many,
};
pub use spectrum::{EmpiricalSpectrum, Model, SpectrumMeta};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
