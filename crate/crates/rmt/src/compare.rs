//! Sup-distance between empirical and computed CDFs of one-dimensional
//! marginals of the Brown measure.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use brown_core::quad::cumulative_trapezoid;
use brown_core::{AdditiveProfile, MultiplicativeProfile};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::{EmpiricalSpectrum, Model};

/// Radii at which the radial CDF is compared.
pub const RADIUS_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Marginal {
    RealPart,
    Argument,
    Radius,
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Marginal::RealPart => "real-part",
            Marginal::Argument => "argument",
            Marginal::Radius => "radius",
        })
    }
}

impl FromStr for Marginal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real-part" => Ok(Marginal::RealPart),
            "argument" => Ok(Marginal::Argument),
            "radius" => Ok(Marginal::Radius),
            other => Err(Error::InvalidParameter(format!(
                "unknown marginal {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ProfileRef<'a> {
    Additive(&'a AdditiveProfile),
    Multiplicative(&'a MultiplicativeProfile),
}

impl ProfileRef<'_> {
    fn model(&self) -> Model {
        match self {
            ProfileRef::Additive(_) => Model::Additive,
            ProfileRef::Multiplicative(_) => Model::Multiplicative,
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            ProfileRef::Additive(p) => p.rows.is_empty(),
            ProfileRef::Multiplicative(p) => p.rows.is_empty(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub model: Model,
    pub n: usize,
    pub t: f64,
    pub marginal: Marginal,
    /// sup over the comparison points of |F_empirical − F_computed|
    pub distance: f64,
    /// number of comparison points
    pub bins: usize,
}

/// Largest gap between the empirical CDF of `samples` and `cdf` at the
/// abscissae `xs`, both one-sided limits of the empirical CDF included.
fn sup_distance(samples: &mut [f64], xs: &[f64], cdf: &[f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    xs.iter()
        .zip(cdf)
        .map(|(&x, &f)| {
            let below = samples.partition_point(|&s| s < x) as f64 / n;
            let at_most = samples.partition_point(|&s| s <= x) as f64 / n;
            (below - f).abs().max((at_most - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Compares one marginal of `spectrum` with the profile's prediction:
/// real part (density 2 v_t w_t), argument (density a_t) or modulus.
pub fn compare_marginal(
    spectrum: &EmpiricalSpectrum,
    profile: ProfileRef<'_>,
    marginal: Marginal,
) -> Result<ComparisonReport> {
    if profile.is_empty() {
        return Err(Error::MismatchedModel("profile has no grid points".into()));
    }
    if spectrum.model() != profile.model() {
        return Err(Error::MismatchedModel(format!(
            "{} spectrum against a {} profile",
            spectrum.model(),
            profile.model()
        )));
    }
    let (xs, cdf, mut samples) = match (profile, marginal) {
        (ProfileRef::Additive(p), Marginal::RealPart) => {
            let xs: Vec<f64> = p.rows.iter().map(|r| r.a).collect();
            let dens: Vec<f64> = p.rows.iter().map(|r| 2.0 * r.v * r.w).collect();
            let cdf = cumulative_trapezoid(&xs, &dens);
            (
                xs,
                cdf,
                spectrum
                    .eigenvalues
                    .iter()
                    .map(|z| z.re)
                    .collect::<Vec<_>>(),
            )
        }
        (ProfileRef::Multiplicative(p), Marginal::Argument) => {
            // a_t is 2π-periodic; close the grid at −π with the value at π
            let last = p.rows.last().expect("non-empty");
            let mut xs = vec![-PI];
            let mut dens = vec![last.arg_density];
            xs.extend(p.rows.iter().map(|r| r.theta));
            dens.extend(p.rows.iter().map(|r| r.arg_density));
            let cdf = cumulative_trapezoid(&xs, &dens);
            (
                xs,
                cdf,
                spectrum.eigenvalues.iter().map(|z| z.arg()).collect(),
            )
        }
        (ProfileRef::Multiplicative(p), Marginal::Radius) => {
            let (xs, cdf) = radial_cdf(p);
            (
                xs,
                cdf,
                spectrum.eigenvalues.iter().map(|z| z.norm()).collect(),
            )
        }
        (prof, m) => {
            return Err(Error::MismatchedModel(format!(
                "marginal {m} is not available for the {} model",
                prof.model()
            )))
        }
    };
    Ok(ComparisonReport {
        model: spectrum.model(),
        n: spectrum.n(),
        t: spectrum.t(),
        marginal,
        distance: sup_distance(&mut samples, &xs, &cdf),
        bins: xs.len(),
    })
}

/// P(|λ| ≤ ρ) = ∫ w_t(θ) · (log min(ρ, 1/r_t) − log r_t)₊ dθ, on
/// [`RADIUS_POINTS`] radii spanning the support.
fn radial_cdf(p: &MultiplicativeProfile) -> (Vec<f64>, Vec<f64>) {
    let inside: Vec<_> = p.rows.iter().filter(|r| r.r < 1.0).collect();
    let r_min = inside.iter().map(|r| r.r).fold(1.0, f64::min);
    let (lo, hi) = (r_min, 1.0 / r_min);
    let d_theta = 2.0 * PI / p.rows.len() as f64;
    let xs: Vec<f64> = (0..RADIUS_POINTS)
        .map(|k| lo * (hi / lo).powf(k as f64 / (RADIUS_POINTS - 1) as f64))
        .collect();
    let cdf = xs
        .iter()
        .map(|&rho| {
            inside
                .iter()
                .map(|r| {
                    let top = rho.min(1.0 / r.r);
                    r.w * (top.ln() - r.r.ln()).max(0.0)
                })
                .sum::<f64>()
                * d_theta
        })
        .collect();
    (xs, cdf)
}
