//! Romberg quadrature with an endpoint-clustering change of variables.
//!
//! Densities of Brown measures and free convolutions vanish like a square
//! root at support edges. Substituting `x = c − h·cos(s)` turns such
//! integrands into analytic functions of `s`, for which Romberg
//! extrapolation converges quickly.

use crate::error::{Error, Result};

/// Relative tolerance between successive Richardson estimates.
pub const ROMBERG_RTOL: f64 = 1e-8;
/// Maximum number of interval halvings.
pub const ROMBERG_MAX_LEVELS: usize = 18;
const MIN_LEVELS: usize = 4;

/// Romberg integration of `f` over `[lo, hi]`.
///
/// Convergence is declared once two successive diagonal extrapolants differ
/// by less than `rtol` relative to the larger of the estimate and the
/// trapezoid estimate of `∫|f|`.
pub fn romberg<F>(lo: f64, hi: f64, rtol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let width = hi - lo;
    let mut trap = 0.5 * width * (f(lo)? + f(hi)?);
    let mut trap_abs = trap.abs();
    let mut prev_row = vec![trap];
    for level in 1..=ROMBERG_MAX_LEVELS {
        let panels = 1usize << level;
        let step = width / panels as f64;
        let mut sum = 0.0;
        let mut sum_abs = 0.0;
        for k in (1..panels).step_by(2) {
            let v = f(lo + step * k as f64)?;
            sum += v;
            sum_abs += v.abs();
        }
        trap = 0.5 * trap + step * sum;
        trap_abs = 0.5 * trap_abs + step * sum_abs;

        let mut row = Vec::with_capacity(level + 1);
        row.push(trap);
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            let r = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(r);
        }
        let best = row[level];
        let diff = (best - prev_row[level - 1]).abs();
        if level >= MIN_LEVELS && diff <= rtol * best.abs().max(trap_abs) {
            return Ok(best);
        }
        prev_row = row;
    }
    Err(Error::QuadratureNonconvergence {
        lo,
        hi,
        levels: ROMBERG_MAX_LEVELS,
    })
}

/// Integral of `f` over `[lo, hi]` after substituting `x = c − h·cos(s)`,
/// `s ∈ [0, π]`. `f` is never evaluated at the endpoints themselves; the
/// integrand is taken to vanish there, which holds whenever `f` is bounded
/// near the endpoints.
pub fn romberg_edge<F>(lo: f64, hi: f64, rtol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let pi = std::f64::consts::PI;
    romberg(0.0, pi, rtol, |s| {
        let sin = s.sin();
        if s <= 0.0 || s >= pi || sin <= 0.0 {
            return Ok(0.0);
        }
        let x = (c - h * s.cos()).clamp(lo, hi);
        if x <= lo || x >= hi {
            return Ok(0.0);
        }
        Ok(f(x)? * h * sin)
    })
    .map_err(|e| match e {
        Error::QuadratureNonconvergence { levels, .. } => {
            Error::QuadratureNonconvergence { lo, hi, levels }
        }
        other => other,
    })
}

/// Trapezoid rule on a periodic function sampled over a full period, with
/// doubling until successive estimates agree to `rtol`.
pub fn periodic_trapezoid<F>(lo: f64, period: f64, rtol: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut panels = 8usize;
    let mut sum = 0.0;
    let mut sum_abs = 0.0;
    for k in 0..panels {
        let v = f(lo + period * k as f64 / panels as f64)?;
        sum += v;
        sum_abs += v.abs();
    }
    let mut est = sum * period / panels as f64;
    for _ in 0..ROMBERG_MAX_LEVELS {
        let step = period / (2 * panels) as f64;
        for k in 0..panels {
            let v = f(lo + step * (2 * k + 1) as f64)?;
            sum += v;
            sum_abs += v.abs();
        }
        panels *= 2;
        let next = sum * period / panels as f64;
        let scale = (sum_abs * period / panels as f64).max(next.abs());
        if (next - est).abs() <= rtol * scale {
            return Ok(next);
        }
        est = next;
    }
    Err(Error::QuadratureNonconvergence {
        lo,
        hi: lo + period,
        levels: ROMBERG_MAX_LEVELS,
    })
}

/// Cumulative trapezoid integral of samples `ys` over abscissae `xs`.
pub fn cumulative_trapezoid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for i in 0..xs.len() {
        if i > 0 {
            acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_exponential() {
        let v = romberg(0.0, 1.0, 1e-12, |x| Ok(x.powi(5))).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-14);
        let v = romberg(0.0, 2.0, 1e-12, |x| Ok(x.exp())).unwrap();
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn semicircle_mass_and_moments() {
        // σ₁ density √(4 − y²)/(2π) on [−2, 2]: mass 1, second moment 1, fourth 2
        let dens = |y: f64| (4.0 - y * y).max(0.0).sqrt() / (2.0 * PI);
        let m0 = romberg_edge(-2.0, 2.0, 1e-10, |y| Ok(dens(y))).unwrap();
        let m2 = romberg_edge(-2.0, 2.0, 1e-10, |y| Ok(y * y * dens(y))).unwrap();
        let m4 = romberg_edge(-2.0, 2.0, 1e-10, |y| Ok(y.powi(4) * dens(y))).unwrap();
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!((m2 - 1.0).abs() < 1e-12);
        assert!((m4 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_edges() {
        // ∫₀¹ √(x(1 − x)) dx = π/8
        let v = romberg_edge(0.0, 1.0, 1e-10, |x| Ok((x * (1.0 - x)).sqrt())).unwrap();
        assert!((v - PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn periodic() {
        let v = periodic_trapezoid(-PI, 2.0 * PI, 1e-12, |x| Ok(1.0 / (2.0 + x.cos()))).unwrap();
        assert!((v - 2.0 * PI / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let r = romberg(0.0, 1.0, 1e-14, |x| {
            Ok(if x < 1.0 / 3.0 { 0.0 } else { 1.0 })
        });
        assert!(matches!(r, Err(Error::QuadratureNonconvergence { .. })));
    }

    #[test]
    fn cumulative() {
        let xs = [0.0, 1.0, 2.0];
        let c = cumulative_trapezoid(&xs, &[0.0, 1.0, 2.0]);
        assert_eq!(c, vec![0.0, 0.5, 2.0]);
    }
}
