//! Brown measures of free Brownian motions started at an atomic self-adjoint
//! or unitary element, plus the free-probability tools used to check them.

pub mod additive;
pub mod error;
pub mod export;
pub mod free_cumulants;
pub mod measure;
pub mod multiplicative;
pub mod quad;
pub mod roots;

pub use additive::{AdditiveBrown, AdditiveProfile, AdditiveRow};
pub use error::{Error, Result};
pub use measure::{Atom, ComplexPoint, MeasureKind, SpectralMeasure};
pub use multiplicative::{
    f_value, haar_annulus_check, t_of_lambda, Arc, MultiplicativeBrown, MultiplicativeProfile,
    MultiplicativeRow,
};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
