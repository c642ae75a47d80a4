//! Finite-N matrix models: X + Z(t) with X diagonal self-adjoint and Z
//! Ginibre, and U·G(t) with G driven by G ← G·exp(ΔZ).

use brown_core::{MeasureKind, SpectralMeasure};
use faer::{c64, Mat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alloc::allocate;
use crate::error::{Error, Result};
use crate::linalg::{expm, gaussian_matrix, haar_unitary, trace};
use crate::spectrum::{EmpiricalSpectrum, Model, SpectrumMeta};

/// Fewest Euler steps accepted for the multiplicative model.
pub const MIN_STEPS: usize = 100;

/// RNG for sample `index` of a run seeded with `seed`: one ChaCha stream per
/// sample, so batches agree whether drawn serially or in parallel.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_size_and_time(n: usize, t: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 2, got {n}"
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(brown_core::Error::NonpositiveTime(t).into());
    }
    Ok(())
}

/// Atom locations repeated according to largest-remainder allocation.
fn diagonal(mu: &SpectralMeasure, n: usize) -> Vec<f64> {
    let weights: Vec<f64> = mu.atoms().iter().map(|a| a.weight).collect();
    allocate(&weights, n)
        .into_iter()
        .zip(mu.atoms())
        .flat_map(|(count, a)| std::iter::repeat_n(a.location, count))
        .collect()
}

fn eigenvalues(m: &Mat<c64>) -> Result<Vec<c64>> {
    let ev = m
        .eigenvalues()
        .map_err(|e| Error::EigenSolverFailure(format!("{e:?}")))?;
    if ev.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::EigenSolverFailure("non-finite eigenvalue".into()));
    }
    Ok(ev)
}

/// X + Z for sample `index`: X = diag of atoms, Z with entry variance t/n.
pub fn additive_matrix(
    mu: &SpectralMeasure,
    n: usize,
    t: f64,
    seed: u64,
    index: u64,
) -> Result<Mat<c64>> {
    if mu.kind() != MeasureKind::RealAtomic {
        return Err(brown_core::Error::WrongSupport {
            expected: "real-atomic",
        }
        .into());
    }
    check_size_and_time(n, t)?;
    let x = diagonal(mu, n);
    let mut m = gaussian_matrix(n, t / n as f64, &mut rng_for(seed, index));
    for (i, xi) in x.into_iter().enumerate() {
        m[(i, i)] += xi;
    }
    Ok(m)
}

fn additive_indexed(
    mu: &SpectralMeasure,
    n: usize,
    t: f64,
    seed: u64,
    index: u64,
) -> Result<EmpiricalSpectrum> {
    let m = additive_matrix(mu, n, t, seed, index)?;
    Ok(EmpiricalSpectrum {
        eigenvalues: eigenvalues(&m)?,
        meta: SpectrumMeta {
            model: Model::Additive,
            n,
            t,
            seed,
            steps: None,
            measure: mu.to_file_format(),
        },
    })
}

/// Eigenvalues of X_N + Z_N(t).
pub fn sample_additive(
    mu: &SpectralMeasure,
    n: usize,
    t: f64,
    seed: u64,
) -> Result<EmpiricalSpectrum> {
    additive_indexed(mu, n, t, seed, 0)
}

/// `count` independent samples; sample i equals what a serial run would
/// produce for stream i.
pub fn sample_additive_many(
    mu: &SpectralMeasure,
    n: usize,
    t: f64,
    seed: u64,
    count: usize,
) -> Result<Vec<EmpiricalSpectrum>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| additive_indexed(mu, n, t, seed, i))
        .collect()
}

/// U·G(t) for sample `index`, together with Σ_k Re tr ΔZ_k = log|det(U·G)|.
pub fn multiplicative_matrix(
    mu: &SpectralMeasure,
    n: usize,
    t: f64,
    steps: usize,
    seed: u64,
    index: u64,
) -> Result<(Mat<c64>, f64)> {
    if !mu.kind().on_circle() {
        return Err(brown_core::Error::WrongSupport { expected: "circle" }.into());
    }
    check_size_and_time(n, t)?;
    if steps < MIN_STEPS {
        return Err(Error::InvalidParameter(format!(
            "steps must be at least {MIN_STEPS}, got {steps}"
        )));
    }
    let mut rng = rng_for(seed, index);
    let mut g = if mu.is_haar() {
        haar_unitary(n, &mut rng)
    } else {
        let phases: Vec<c64> = diagonal(mu, n)
            .into_iter()
            .map(|a| c64::from_polar(1.0, a))
            .collect();
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                phases[i]
            } else {
                c64::new(0.0, 0.0)
            }
        })
    };
    let variance = t / steps as f64 / n as f64;
    let mut log_det = 0.0;
    for _ in 0..steps {
        let dz = gaussian_matrix(n, variance, &mut rng);
        log_det += trace(&dz).re;
        g = &g * &expm(&dz);
    }
    Ok((g, log_det))
}

fn multiplicative_indexed(
    mu: &SpectralMeasure,
    n: usize,
    t: f64,
    steps: usize,
    seed: u64,
    index: u64,
) -> Result<EmpiricalSpectrum> {
    let (m, _) = multiplicative_matrix(mu, n, t, steps, seed, index)?;
    Ok(EmpiricalSpectrum {
        eigenvalues: eigenvalues(&m)?,
        meta: SpectrumMeta {
            model: Model::Multiplicative,
            n,
            t,
            seed,
            steps: Some(steps),
            measure: mu.to_file_format(),
        },
    })
}

/// Eigenvalues of U_N·G_N(t) after `steps` geometric Euler steps.
pub fn sample_multiplicative(
    mu: &SpectralMeasure,
    n: usize,
    t: f64,
    steps: usize,
    seed: u64,
) -> Result<EmpiricalSpectrum> {
    multiplicative_indexed(mu, n, t, steps, seed, 0)
}

pub fn sample_multiplicative_many(
    mu: &SpectralMeasure,
    n: usize,
    t: f64,
    steps: usize,
    seed: u64,
    count: usize,
) -> Result<Vec<EmpiricalSpectrum>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| multiplicative_indexed(mu, n, t, steps, seed, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn validation() {
        let d = SpectralMeasure::point_mass(0.0).unwrap();
        assert!(sample_additive(&d, 1, 1.0, 0).is_err());
        assert!(sample_additive(&d, 10, 0.0, 0).is_err());
        assert!(sample_additive(&SpectralMeasure::haar(), 10, 1.0, 0).is_err());
        let h = SpectralMeasure::haar();
        assert!(sample_multiplicative(&h, 10, 1.0, 99, 0).is_err());
        assert!(sample_multiplicative(&d, 10, 1.0, 100, 0).is_err());
    }

    #[test]
    fn diagonal_follows_allocation() {
        let mu = SpectralMeasure::real_atomic([(-0.8, 0.25), (0.8, 0.75)]).unwrap();
        let x = diagonal(&mu, 10);
        assert_eq!(x.iter().filter(|&&v| v == -0.8).count(), 3);
        assert_eq!(x.len(), 10);
    }

    #[test]
    fn additive_trace_identity_and_determinism() {
        let mu = SpectralMeasure::real_atomic([(-0.8, 0.25), (0.8, 0.75)]).unwrap();
        let m = additive_matrix(&mu, 120, 1.0, 42, 0).unwrap();
        let s = sample_additive(&mu, 120, 1.0, 42).unwrap();
        let sum: c64 = s.eigenvalues.iter().sum();
        assert!((sum - trace(&m)).norm() < 1e-10);
        assert_eq!(s, sample_additive(&mu, 120, 1.0, 42).unwrap());
        assert_ne!(s, sample_additive(&mu, 120, 1.0, 43).unwrap());
        let many = sample_additive_many(&mu, 120, 1.0, 42, 3).unwrap();
        assert_eq!(many[0], s);
        assert_ne!(many[1], s);
    }

    #[test]
    fn circular_law_disk() {
        let d = SpectralMeasure::point_mass(0.0).unwrap();
        let s = sample_additive(&d, 300, 1.0, 42).unwrap();
        assert!(s.fraction_where(|r| r <= 1.05) >= 0.95);
        let s = sample_additive(&d, 300, 4.0, 42).unwrap();
        assert!(s.fraction_where(|r| r <= 2.1) >= 0.95);
    }

    #[test]
    fn multiplicative_determinant_bookkeeping() {
        let mu = SpectralMeasure::circle_atomic([(0.5, 0.5), (-2.0, 0.5)]).unwrap();
        let (m, log_det) = multiplicative_matrix(&mu, 40, 1.0, 100, 7, 0).unwrap();
        let ev = eigenvalues(&m).unwrap();
        let sum: f64 = ev.iter().map(|z| z.norm().ln()).sum();
        assert!((sum - log_det).abs() <= 1e-8 * log_det.abs().max(1.0));
    }

    #[test]
    fn small_time_stays_near_initial_spectrum() {
        let mu = SpectralMeasure::circle_point_mass(0.0).unwrap();
        let s = sample_multiplicative(&mu, 60, 1e-3, 100, 1).unwrap();
        assert!(s.eigenvalues.iter().all(|z| (z - 1.0).norm() < 0.05));
        let mu = SpectralMeasure::circle_point_mass(PI / 2.0).unwrap();
        let s = sample_multiplicative(&mu, 60, 1e-3, 100, 1).unwrap();
        assert!(s
            .eigenvalues
            .iter()
            .all(|z| (z - c64::new(0.0, 1.0)).norm() < 0.05));
    }

    #[test]
    fn multiplicative_determinism() {
        let h = SpectralMeasure::haar();
        let a = sample_multiplicative(&h, 30, 0.5, 100, 3).unwrap();
        assert_eq!(a, sample_multiplicative(&h, 30, 0.5, 100, 3).unwrap());
        let many = sample_multiplicative_many(&h, 30, 0.5, 100, 3, 2).unwrap();
        assert_eq!(many[0], a);
    }
}
