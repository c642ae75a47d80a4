//! Brown measure of x₀ + c_t, with x₀ self-adjoint of law μ and c_t a free
//! circular Brownian motion.
//!
//! Everything is driven by the boundary function
//!
//! ```text
//! v_t(a) = inf { b > 0 : Σ_j w_j / ((a − x_j)² + b²) ≤ 1/t },
//! ```
//!
//! the support is `Λ_t = { a + ib : |b| < v_t(a) }`, and inside it the density
//! depends on `a` only:
//!
//! ```text
//! w_t(a) = (1/πt) · (1 − (t/2) · d/da Σ_j w_j x_j / ((a − x_j)² + v_t(a)²)).
//! ```
//!
//! The map `a ↦ ψ_t(a) = Re H_t(a + i v_t(a))`, with `H_t(z) = z + t G_μ(z)`,
//! pushes the Brown measure forward to μ ⊞ σ_t, whose density at `ψ_t(a)` is
//! `v_t(a)/(πt)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{ComplexPoint, SpectralMeasure};
use crate::quad::{romberg_edge, ROMBERG_RTOL};
use crate::roots::bisect_predicate;

/// Brown measure of x₀ + c_t for a fixed atomic law of x₀ and time t.
#[derive(Debug, Clone)]
pub struct AdditiveBrown {
    mu: SpectralMeasure,
    t: f64,
}

fn check_point(a: f64) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("a"))
    }
}

impl AdditiveBrown {
    pub fn new(mu: SpectralMeasure, t: f64) -> Result<Self> {
        mu.require_real()?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::NonpositiveTime(t));
        }
        Ok(AdditiveBrown { mu, t })
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.mu
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Σ_j w_j / ((a − x_j)² + b²); infinite when b = 0 and a is an atom.
    pub fn resolvent_mass(&self, a: f64, b: f64) -> f64 {
        let b2 = b * b;
        self.mu
            .atoms()
            .iter()
            .map(|atom| {
                let d = a - atom.location;
                atom.weight / (d * d + b2)
            })
            .sum()
    }

    /// `Σ_j w_j/(a − x_j)² − 1/t`; positive exactly on V_t = {v_t > 0}.
    fn edge_excess(&self, a: f64) -> f64 {
        self.resolvent_mass(a, 0.0) - 1.0 / self.t
    }

    /// Boundary function v_t(a) ≥ 0.
    pub fn v(&self, a: f64) -> Result<f64> {
        check_point(a)?;
        Ok(self.v_unchecked(a))
    }

    fn v_unchecked(&self, a: f64) -> f64 {
        let inv_t = 1.0 / self.t;
        if self.resolvent_mass(a, 0.0) <= inv_t {
            return 0.0;
        }
        // b ↦ Σ w_j/((a−x_j)²+b²) is strictly decreasing and ≤ 1/b², so the
        // root lies in (0, √t]
        let (inside, outside) =
            bisect_predicate(0.0, self.t.sqrt(), |b| self.resolvent_mass(a, b) > inv_t);
        0.5 * (inside + outside)
    }

    /// |Σ_j w_j/((a−x_j)² + v²) − 1/t| at v = v_t(a), or 0 outside V_t.
    pub fn v_residual(&self, a: f64) -> Result<f64> {
        let v = self.v(a)?;
        if v == 0.0 {
            return Ok(0.0);
        }
        Ok((self.resolvent_mass(a, v) - 1.0 / self.t).abs())
    }

    /// H_t(z) = z + t G_μ(z), the left inverse of the subordination function.
    pub fn subordination_h(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        Ok(z + self.t * self.mu.cauchy_transform(z)?)
    }

    /// ψ_t(a) = a + t Σ_j w_j (a − x_j) / ((a − x_j)² + v_t(a)²).
    pub fn psi(&self, a: f64) -> Result<f64> {
        check_point(a)?;
        let v = self.v_unchecked(a);
        self.psi_with_v(a, v)
    }

    fn psi_with_v(&self, a: f64, v: f64) -> Result<f64> {
        let v2 = v * v;
        let mut sum = 0.0;
        for atom in self.mu.atoms() {
            let d = a - atom.location;
            let den = d * d + v2;
            if den == 0.0 {
                return Err(Error::AtomDivision(a));
            }
            sum += atom.weight * d / den;
        }
        Ok(a + self.t * sum)
    }

    /// Density w_t(a) of the Brown measure on the vertical segment over `a`;
    /// zero outside V_t.
    pub fn density(&self, a: f64) -> Result<f64> {
        check_point(a)?;
        let v = self.v_unchecked(a);
        Ok(self.density_with_v(a, v))
    }

    fn density_with_v(&self, a: f64, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let v2 = v * v;
        // implicit differentiation of Σ w_j/D_j = 1/t gives d(v²)/da = −2A/B
        let (mut sum_a, mut sum_b) = (0.0, 0.0);
        for atom in self.mu.atoms() {
            let d = a - atom.location;
            let den = d * d + v2;
            let den2 = den * den;
            sum_a += atom.weight * d / den2;
            sum_b += atom.weight / den2;
        }
        let dv2 = -2.0 * sum_a / sum_b;
        let d_i2: f64 = -self
            .mu
            .atoms()
            .iter()
            .map(|atom| {
                let d = a - atom.location;
                let den = d * d + v2;
                atom.weight * atom.location * (2.0 * d + dv2) / (den * den)
            })
            .sum::<f64>();
        (1.0 - 0.5 * self.t * d_i2) / (PI * self.t)
    }

    /// Density of the Brown measure at a point of the plane. It is constant
    /// along each vertical segment of the support.
    pub fn brown_density(&self, z: ComplexPoint) -> Result<f64> {
        check_point(z.re)?;
        if !z.im.is_finite() {
            return Err(Error::NonFinite("b"));
        }
        let v = self.v_unchecked(z.re);
        if z.im.abs() < v {
            Ok(self.density_with_v(z.re, v))
        } else {
            Ok(0.0)
        }
    }

    /// The density of μ ⊞ σ_t at ψ_t(a): returns `(ψ_t(a), v_t(a)/(πt))`.
    pub fn law_density(&self, a: f64) -> Result<(f64, f64)> {
        check_point(a)?;
        let v = self.v_unchecked(a);
        if v == 0.0 {
            return Err(Error::OutsideSupport(a));
        }
        Ok((self.psi_with_v(a, v)?, v / (PI * self.t)))
    }

    /// Connected components of V_t = {a : v_t(a) > 0}, as open intervals.
    ///
    /// `a ↦ Σ w_j/(a − x_j)²` is convex between consecutive atoms and monotone
    /// outside them, so each gap between atoms holds at most one excursion
    /// below 1/t. Endpoints are bisected until adjacent floats and reported
    /// on the side where v_t vanishes.
    pub fn support_intervals(&self) -> Vec<(f64, f64)> {
        let atoms = self.mu.atoms();
        let first = atoms[0].location;
        let last = atoms[atoms.len() - 1].location;
        let reach = self.t.sqrt();
        let inside = |a: f64| self.edge_excess(a) > 0.0;

        let (_, left) = bisect_predicate(first, first - reach, inside);
        let (_, right) = bisect_predicate(last, last + reach, inside);

        let mut intervals = Vec::new();
        let mut start = left;
        for pair in atoms.windows(2) {
            let (x0, x1) = (pair[0].location, pair[1].location);
            // minimiser of the convex excess: zero of −2 Σ w_j/(a − x_j)³
            let slope_negative = |a: f64| {
                let s: f64 = atoms
                    .iter()
                    .map(|atom| atom.weight / (a - atom.location).powi(3))
                    .sum();
                s > 0.0
            };
            let (lo, hi) = bisect_predicate(x0, x1, slope_negative);
            let a_min = 0.5 * (lo + hi);
            if self.edge_excess(a_min) <= 0.0 {
                let (_, gap_lo) = bisect_predicate(x0, a_min, inside);
                let (_, gap_hi) = bisect_predicate(x1, a_min, inside);
                intervals.push((start, gap_lo));
                start = gap_hi;
            }
        }
        intervals.push((start, right));
        intervals
    }

    /// Rows of (a, v, w, ψ) over `grid` together with the support intervals.
    pub fn profile(&self, grid: &[f64]) -> Result<AdditiveProfile> {
        validate_grid(grid)?;
        let rows = grid
            .par_iter()
            .map(|&a| {
                let v = self.v_unchecked(a);
                Ok(AdditiveRow {
                    a,
                    v,
                    w: self.density_with_v(a, v),
                    psi: self.psi_with_v(a, v)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AdditiveProfile {
            model: self.clone(),
            rows,
            support_intervals: self.support_intervals(),
        })
    }

    /// ∫ ψ_t(a)^k · 2 v_t(a) w_t(a) da over V_t.
    pub fn pushforward_moment(&self, k: u32) -> Result<f64> {
        self.support_intervals()
            .into_iter()
            .map(|(lo, hi)| {
                romberg_edge(lo, hi, ROMBERG_RTOL, |a| {
                    let v = self.v_unchecked(a);
                    let w = self.density_with_v(a, v);
                    let base = 2.0 * v * w;
                    Ok(if k == 0 {
                        base
                    } else {
                        base * self.psi_with_v(a, v)?.powi(k as i32)
                    })
                })
            })
            .sum()
    }

    /// Total mass ∫ 2 v_t w_t da of the Brown measure.
    pub fn total_mass(&self) -> Result<f64> {
        self.pushforward_moment(0)
    }

    /// Default grid: symmetric about 0 out to max|x_j| + 2√t, 801 points.
    pub fn default_grid(&self) -> Vec<f64> {
        let half = self.mu.max_abs_location() + 2.0 * self.t.sqrt();
        uniform_grid(-half, half, 801)
    }
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if grid.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidGrid("non-finite grid point".into()));
    }
    if grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidGrid(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdditiveRow {
    pub a: f64,
    pub v: f64,
    pub w: f64,
    pub psi: f64,
}

/// Sampled Brown measure of x₀ + c_t.
#[derive(Debug, Clone)]
pub struct AdditiveProfile {
    model: AdditiveBrown,
    pub rows: Vec<AdditiveRow>,
    pub support_intervals: Vec<(f64, f64)>,
}

impl AdditiveProfile {
    pub fn model(&self) -> &AdditiveBrown {
        &self.model
    }

    pub fn time(&self) -> f64 {
        self.model.t
    }

    /// Moments m_1..m_{k_max} of the push-forward of the Brown measure under
    /// ψ_t, i.e. of μ ⊞ σ_t.
    pub fn pushforward_moments(&self, k_max: u32) -> Result<Vec<f64>> {
        (1..=k_max)
            .map(|k| self.model.pushforward_moment(k))
            .collect()
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.model.total_mass()
    }

    pub fn max_density(&self) -> f64 {
        self.rows.iter().map(|r| r.w).fold(0.0, f64::max)
    }

    /// Rows inside V_t mapped to (y, p) = (ψ_t(a), v_t(a)/(πt)).
    pub fn law_rows(&self) -> Vec<(f64, f64)> {
        let t = self.model.t;
        self.rows
            .iter()
            .filter(|r| r.v > 0.0)
            .map(|r| (r.psi, r.v / (PI * t)))
            .collect()
    }
}
