//! Brown measure of u·b_t, with u unitary of law μ and b_t a free
//! multiplicative Brownian motion.
//!
//! Write `r = e^{−σ}` and `δ_j = θ − α_j` for the atoms α_j of μ. The function
//!
//! ```text
//! f(σ, θ) = (1/2σ) Σ_j w_j sinh σ / (cosh σ − cos δ_j)
//! ```
//!
//! is decreasing in σ, and `r_t(θ)` solves `f = 1/t` (or is 1 when
//! `f(0⁺, θ) ≤ 1/t`). The support is `{ r_t(θ) < |λ| < 1/r_t(θ) }`, the density
//! is `w_t(θ)/|λ|²`, and
//!
//! ```text
//! w_t(θ) = (1/2πt) dφ/dθ,   φ(θ) = θ + (t/2) Σ_j w_j sin δ_j / (cosh σ − cos δ_j).
//! ```
//!
//! All the σ-dependence is written with `cosh σ − cos δ = 2 sinh²(σ/2) +
//! 2 sin²(δ/2)`, which stays accurate as r → 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{normalize_angle, Atom, ComplexPoint, SpectralMeasure};
use crate::quad::{periodic_trapezoid, romberg, romberg_edge, ROMBERG_RTOL};
use crate::roots::bisect_predicate;

const TWO_PI: f64 = 2.0 * PI;

/// Poisson-type kernel sinh σ / (cosh σ − cos δ).
fn kernel(sigma: f64, delta: f64) -> f64 {
    if sigma > 1.0 {
        let e = (-sigma).exp();
        (1.0 - e * e) / (1.0 - 2.0 * delta.cos() * e + e * e)
    } else {
        sigma.sinh() / cosh_minus_cos(sigma, delta)
    }
}

fn cosh_minus_cos(sigma: f64, delta: f64) -> f64 {
    let a = (0.5 * sigma).sinh();
    let b = (0.5 * delta).sin();
    2.0 * (a * a + b * b)
}

/// (sinh 2σ / 2 − σ, σ cosh σ − sinh σ), by series for small σ.
fn cancelling_pair(sigma: f64) -> (f64, f64) {
    if sigma >= 0.5 {
        return (
            0.5 * (2.0 * sigma).sinh() - sigma,
            sigma * sigma.cosh() - sigma.sinh(),
        );
    }
    let s2 = sigma * sigma;
    let (mut a, mut b) = (0.0, 0.0);
    // term = σ^{2k+1}/(2k+1)!
    let mut term = sigma;
    let mut four_k = 1.0;
    for k in 1..=12 {
        let kf = k as f64;
        term *= s2 / ((2.0 * kf) * (2.0 * kf + 1.0));
        four_k *= 4.0;
        a += four_k * term;
        b += 2.0 * kf * term;
    }
    (a, b)
}

/// Σ w_j / (4 sin²(δ_j/2)): the limit of f as r → 1⁻. Infinite on an atom.
fn f_boundary(atoms: &[Atom], theta: f64) -> f64 {
    atoms
        .iter()
        .map(|a| {
            let s = (0.5 * (theta - a.location)).sin();
            a.weight / (4.0 * s * s)
        })
        .sum()
}

fn f_sigma(atoms: &[Atom], sigma: f64, theta: f64) -> f64 {
    let sum: f64 = atoms
        .iter()
        .map(|a| a.weight * kernel(sigma, theta - a.location))
        .sum();
    sum / (2.0 * sigma)
}

fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("theta"))
    }
}

/// f(r, θ) for the reflected law `mu_bar`; f(r) = f(1/r) above the circle.
/// Haar gives 1/(−2 log r).
pub fn f_value(mu_bar: &SpectralMeasure, r: f64, theta: f64) -> Result<f64> {
    mu_bar.require_circle()?;
    check_angle(theta)?;
    if !(r > 0.0 && r.is_finite()) || r == 1.0 {
        return Err(Error::InvalidRadius(r));
    }
    let sigma = r.ln().abs();
    if mu_bar.is_haar() {
        return Ok(1.0 / (2.0 * sigma));
    }
    let mu = mu_bar.reflect()?;
    Ok(f_sigma(mu.atoms(), sigma, theta))
}

/// T(λ) = 1/f(|λ|, arg λ), with the boundary limit on the unit circle
/// (T = 0 where that limit diverges).
pub fn t_of_lambda(mu_bar: &SpectralMeasure, lambda: ComplexPoint) -> Result<f64> {
    mu_bar.require_circle()?;
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(Error::NonFinite("lambda"));
    }
    let modulus = lambda.norm();
    if modulus == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let theta = lambda.arg();
    if modulus == 1.0 {
        if mu_bar.is_haar() {
            return Ok(0.0);
        }
        let f1 = f_boundary(mu_bar.reflect()?.atoms(), theta);
        return Ok(if f1.is_finite() { 1.0 / f1 } else { 0.0 });
    }
    Ok(1.0 / f_value(mu_bar, modulus, theta)?)
}

/// An open arc of angles `(start, end)` with `start ∈ (−π, π]` and
/// `end − start ∈ (0, 2π]`; `end` may exceed π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
}

impl Arc {
    pub fn full_circle() -> Self {
        Arc {
            start: -PI,
            end: PI,
        }
    }

    pub fn is_full(&self) -> bool {
        self.end - self.start >= TWO_PI
    }

    /// The representative of θ in (start, end), if any.
    pub fn lift(&self, theta: f64) -> Option<f64> {
        if self.is_full() {
            return Some(theta);
        }
        [theta, theta + TWO_PI, theta - TWO_PI]
            .into_iter()
            .find(|&x| x > self.start && x < self.end)
    }
}

/// Brown measure of u·b_t for a fixed law μ of u and time t.
#[derive(Debug, Clone)]
pub struct MultiplicativeBrown {
    mu: SpectralMeasure,
    mu_bar: SpectralMeasure,
    t: f64,
    arcs: Vec<Arc>,
}

/// Per-angle quantities on the boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplicativeRow {
    pub theta: f64,
    pub r: f64,
    pub phi: f64,
    pub w: f64,
    pub arg_density: f64,
}

impl MultiplicativeBrown {
    /// `mu` is the law of u (circle-atomic or Haar).
    pub fn new(mu: SpectralMeasure, t: f64) -> Result<Self> {
        mu.require_circle()?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::NonpositiveTime(t));
        }
        let mu_bar = mu.reflect()?;
        let mut model = MultiplicativeBrown {
            mu,
            mu_bar,
            t,
            arcs: Vec::new(),
        };
        model.arcs = model.compute_arcs();
        Ok(model)
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.mu
    }

    pub fn reflected_measure(&self) -> &SpectralMeasure {
        &self.mu_bar
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Maximal open arcs of U_t = {θ : r_t(θ) < 1}.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    fn atoms(&self) -> &[Atom] {
        self.mu.atoms()
    }

    /// σ_t(θ) = −log r_t(θ) ≥ 0.
    pub fn sigma(&self, theta: f64) -> Result<f64> {
        check_angle(theta)?;
        Ok(self.sigma_unchecked(theta))
    }

    fn sigma_unchecked(&self, theta: f64) -> f64 {
        if self.mu.is_haar() {
            return 0.5 * self.t;
        }
        let inv_t = 1.0 / self.t;
        let atoms = self.atoms();
        if f_boundary(atoms, theta) <= inv_t {
            return 0.0;
        }
        let mut hi = 1.0;
        while f_sigma(atoms, hi, theta) > inv_t {
            hi *= 2.0;
        }
        let (inside, outside) = bisect_predicate(0.0, hi, |s| f_sigma(atoms, s, theta) > inv_t);
        0.5 * (inside + outside)
    }

    pub fn r_t(&self, theta: f64) -> Result<f64> {
        Ok((-self.sigma(theta)?).exp())
    }

    /// |f(r_t(θ), θ) − 1/t| where r_t(θ) < 1, and 0 elsewhere.
    pub fn root_residual(&self, theta: f64) -> Result<f64> {
        let sigma = self.sigma(theta)?;
        if sigma == 0.0 {
            return Ok(0.0);
        }
        let f = if self.mu.is_haar() {
            1.0 / (2.0 * sigma)
        } else {
            f_sigma(self.atoms(), sigma, theta)
        };
        Ok((f - 1.0 / self.t).abs())
    }

    /// Φ(z) = z exp((t/2) Σ_j w_j (1 + ξ_j z)/(1 − ξ_j z)), ξ_j the atoms of μ̄.
    pub fn phi_map(&self, z: ComplexPoint) -> Result<ComplexPoint> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("z"));
        }
        if self.mu.is_haar() {
            return Ok(z * (0.5 * self.t).exp());
        }
        let one = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for a in self.mu_bar.atoms() {
            let xz = Complex64::from_polar(1.0, a.location) * z;
            let den = one - xz;
            if den.norm() <= crate::measure::POLE_TOL {
                return Err(Error::PoleAtAtom {
                    point: z.to_string(),
                });
            }
            sum += a.weight * (one + xz) / den;
        }
        Ok(z * (0.5 * self.t * sum).exp())
    }

    /// The arc containing θ and θ's representative there.
    fn locate(&self, theta: f64) -> Option<f64> {
        self.arcs.iter().find_map(|a| a.lift(theta))
    }

    /// (m_t(θ), dm_t/dθ) at σ = σ_t(θ) > 0, with dσ/dθ from implicit
    /// differentiation of f(σ, θ) = 1/t.
    fn m_and_derivative(&self, theta: f64, sigma: f64) -> (f64, f64) {
        let (sh, ch) = (sigma.sinh(), sigma.cosh());
        let (big_a, big_b) = cancelling_pair(sigma);
        let (mut m, mut m_theta, mut m_sigma) = (0.0, 0.0, 0.0);
        let (mut f_theta, mut f_sig) = (0.0, 0.0);
        for a in self.atoms() {
            let delta = theta - a.location;
            let (sd, cd) = delta.sin_cos();
            let c = cosh_minus_cos(sigma, delta);
            let c2 = c * c;
            m += a.weight * sd / c;
            m_theta += a.weight * (cd * ch - 1.0) / c2;
            m_sigma -= a.weight * sd * sh / c2;
            f_theta -= a.weight * sh * sd / c2;
            f_sig += a.weight * (-big_a - cd * big_b) / c2;
        }
        // common factors 1/(2σ) and 1/(2σ²) of ∂f/∂θ and ∂f/∂σ
        let dsigma = -(f_theta * sigma) / f_sig;
        (m, m_theta + dsigma * m_sigma)
    }

    fn row_unchecked(&self, theta: f64) -> MultiplicativeRow {
        let t = self.t;
        if self.mu.is_haar() {
            let w = 1.0 / (TWO_PI * t);
            return MultiplicativeRow {
                theta,
                r: (-0.5 * t).exp(),
                phi: theta,
                w,
                arg_density: t * w,
            };
        }
        let sigma = self.sigma_unchecked(theta);
        if sigma == 0.0 {
            // boundary value of φ: sin δ/(1 − cos δ) = cot(δ/2)
            let m: f64 = self
                .atoms()
                .iter()
                .map(|a| a.weight / (0.5 * (theta - a.location)).tan())
                .sum();
            return MultiplicativeRow {
                theta,
                r: 1.0,
                phi: theta + 0.5 * t * m,
                w: 0.0,
                arg_density: 0.0,
            };
        }
        let lifted = self.locate(theta).unwrap_or(theta);
        let (m, dm) = self.m_and_derivative(theta, sigma);
        let w = (2.0 / t + dm) / (4.0 * PI);
        MultiplicativeRow {
            theta,
            r: (-sigma).exp(),
            phi: lifted + 0.5 * t * m,
            w,
            arg_density: 2.0 * sigma * w,
        }
    }

    /// r_t, φ, w_t and a_t at one angle. Outside U_t, r = 1, w = a = 0 and
    /// φ is its boundary value.
    pub fn row(&self, theta: f64) -> Result<MultiplicativeRow> {
        check_angle(theta)?;
        Ok(self.row_unchecked(theta))
    }

    fn row_in_u(&self, theta: f64) -> Result<MultiplicativeRow> {
        let row = self.row(theta)?;
        if row.r < 1.0 {
            Ok(row)
        } else {
            Err(Error::OutsideU(theta))
        }
    }

    /// Continuous argument φ(θ) of Φ(r_t(θ)e^{iθ}) along the arc holding θ.
    pub fn phi_of_theta(&self, theta: f64) -> Result<f64> {
        Ok(self.row_in_u(theta)?.phi)
    }

    pub fn density_w_theta(&self, theta: f64) -> Result<f64> {
        Ok(self.row_in_u(theta)?.w)
    }

    /// dφ/dθ = 2πt·w_t(θ).
    pub fn phi_derivative(&self, theta: f64) -> Result<f64> {
        Ok(TWO_PI * self.t * self.row_in_u(theta)?.w)
    }

    /// Law of u·u_t at e^{iφ(θ)}: returns `(φ(θ), −log r_t(θ)/(πt))`.
    pub fn law_density(&self, theta: f64) -> Result<(f64, f64)> {
        let row = self.row_in_u(theta)?;
        Ok((row.phi, -row.r.ln() / (PI * self.t)))
    }

    /// Density of the Brown measure at λ: w_t(arg λ)/|λ|² inside the
    /// support, 0 outside.
    pub fn brown_density(&self, lambda: ComplexPoint) -> Result<f64> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::NonFinite("lambda"));
        }
        let modulus = lambda.norm();
        if modulus == 0.0 {
            return Ok(0.0);
        }
        let row = self.row_unchecked(lambda.arg());
        if row.r < 1.0 && modulus > row.r && modulus < 1.0 / row.r {
            Ok(row.w / (modulus * modulus))
        } else {
            Ok(0.0)
        }
    }

    /// T(λ) for this model's μ̄.
    pub fn t_of_lambda(&self, lambda: ComplexPoint) -> Result<f64> {
        t_of_lambda(&self.mu_bar, lambda)
    }

    /// U_t from the boundary function F(θ) = Σ w_j/(4 sin²(δ_j/2)) − 1/t,
    /// which is convex on every gap between consecutive atoms (the gap after
    /// the last atom wraps around to the first).
    fn compute_arcs(&self) -> Vec<Arc> {
        if self.mu.is_haar() {
            return vec![Arc::full_circle()];
        }
        let atoms = self.atoms();
        let inv_t = 1.0 / self.t;
        let excess = |x: f64| f_boundary(atoms, x) > inv_t;
        let slope_negative = |x: f64| {
            let s: f64 = atoms
                .iter()
                .map(|a| {
                    let h = 0.5 * (x - a.location);
                    a.weight * h.cos() / h.sin().powi(3)
                })
                .sum();
            s > 0.0
        };
        let n = atoms.len();
        // closed intervals [lo, hi] where r_t = 1
        let mut outside = Vec::new();
        for j in 0..n {
            let lo = atoms[j].location;
            let hi = if j + 1 < n {
                atoms[j + 1].location
            } else {
                atoms[0].location + TWO_PI
            };
            let (a, b) = bisect_predicate(lo, hi, slope_negative);
            let x_min = 0.5 * (a + b);
            if !excess(x_min) {
                let (_, left) = bisect_predicate(lo, x_min, excess);
                let (_, right) = bisect_predicate(hi, x_min, excess);
                outside.push((left, right));
            }
        }
        if outside.is_empty() {
            return vec![Arc::full_circle()];
        }
        let k = outside.len();
        (0..k)
            .map(|i| {
                let start = outside[i].1;
                let mut end = outside[(i + 1) % k].0;
                while end <= start {
                    end += TWO_PI;
                }
                let shifted = normalize_angle(start);
                Arc {
                    start: shifted,
                    end: end + (shifted - start),
                }
            })
            .collect()
    }

    /// ∫ g over U_t, with the edge-clustering rule on proper arcs and the
    /// periodic trapezoid on a full circle.
    fn integrate_over_u<F>(&self, g: F) -> Result<f64>
    where
        F: Fn(f64, f64, f64) -> Result<f64>,
    {
        self.arcs
            .iter()
            .map(|arc| {
                if arc.is_full() {
                    periodic_trapezoid(-PI, TWO_PI, ROMBERG_RTOL, |x| g(x, arc.start, arc.end))
                } else {
                    romberg_edge(arc.start, arc.end, ROMBERG_RTOL, |x| {
                        g(x, arc.start, arc.end)
                    })
                }
            })
            .sum()
    }

    /// ∫ a_t(θ) dθ over U_t: the total mass of the Brown measure.
    pub fn total_mass(&self) -> Result<f64> {
        self.integrate_over_u(|x, _, _| Ok(self.row_unchecked(x).arg_density))
    }

    /// ∫ g(φ) p_t dφ over the image of U_t, computed as ∫ g(φ(θ)) p(θ) φ'(θ) dθ
    /// with φ' by central differences.
    fn law_integral<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(f64) -> f64,
    {
        self.integrate_over_u(|x, lo, hi| {
            let row = self.row_unchecked(x);
            let p = -row.r.ln() / (PI * self.t);
            if p == 0.0 {
                return Ok(0.0);
            }
            let dphi = if self.mu.is_haar() {
                1.0
            } else {
                let h = if hi - lo >= TWO_PI {
                    1e-6
                } else {
                    1e-6f64.min(0.5 * (x - lo)).min(0.5 * (hi - x))
                };
                let ahead = self.row_unchecked(x + h).phi;
                let behind = self.row_unchecked(x - h).phi;
                let mut diff = ahead - behind;
                // the lifted φ may jump by 2π if x ± h crosses ±π
                diff -= TWO_PI * (diff / TWO_PI).round();
                diff / (2.0 * h)
            };
            Ok(g(row.phi) * p * dphi)
        })
    }

    /// Total mass of the law of u·u_t.
    pub fn law_mass(&self) -> Result<f64> {
        self.law_integral(|_| 1.0)
    }

    /// Moment ∫ e^{ikφ} p_t(φ) dφ of the law of u·u_t.
    pub fn law_moment(&self, k: i32) -> Result<Complex64> {
        let kf = k as f64;
        let re = self.law_integral(|phi| (kf * phi).cos())?;
        let im = self.law_integral(|phi| (kf * phi).sin())?;
        Ok(Complex64::new(re, im))
    }

    /// Profile on `n_theta` equally spaced angles −π + 2π(k+1)/n.
    pub fn profile(&self, n_theta: usize) -> Result<MultiplicativeProfile> {
        if n_theta < 16 {
            return Err(Error::InvalidGrid(format!(
                "need at least 16 angles, got {n_theta}"
            )));
        }
        let thetas = angle_grid(n_theta);
        let rows = thetas.par_iter().map(|&x| self.row_unchecked(x)).collect();
        Ok(MultiplicativeProfile {
            model: self.clone(),
            rows,
        })
    }
}

/// n equally spaced angles in (−π, π], ending at π.
pub fn angle_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                PI
            } else {
                -PI + TWO_PI * (k + 1) as f64 / n as f64
            }
        })
        .collect()
}

/// Sampled Brown measure of u·b_t.
#[derive(Debug, Clone)]
pub struct MultiplicativeProfile {
    model: MultiplicativeBrown,
    pub rows: Vec<MultiplicativeRow>,
}

impl MultiplicativeProfile {
    pub fn model(&self) -> &MultiplicativeBrown {
        &self.model
    }

    pub fn time(&self) -> f64 {
        self.model.t
    }

    pub fn arcs(&self) -> &[Arc] {
        self.model.arcs()
    }

    /// (θ, a_t(θ)) on the grid.
    pub fn arg_marginal(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.theta, r.arg_density)).collect()
    }

    /// Rows inside U_t mapped to (φ, p) = (φ(θ), −log r_t(θ)/(πt)).
    pub fn law_rows(&self) -> Vec<(f64, f64)> {
        let t = self.model.t;
        self.rows
            .iter()
            .filter(|r| r.r < 1.0)
            .map(|r| (r.phi, -r.r.ln() / (PI * t)))
            .collect()
    }

    pub fn max_density(&self) -> f64 {
        self.rows.iter().map(|r| r.w).fold(0.0, f64::max)
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.model.total_mass()
    }
}

/// Radial CDF of the annulus law two ways.
#[derive(Debug, Clone, Serialize)]
pub struct HaarAnnulusReport {
    pub t: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// (ρ, 1 + S⁻¹(ρ⁻²), ∫ density over the annulus up to ρ)
    pub samples: Vec<(f64, f64, f64)>,
    pub max_discrepancy: f64,
}

/// Compares the radial CDF ½ + log ρ/t from the S-transform S(z) = e^{−t−2tz}
/// of b_t b_t* with the radial integral of the computed Haar profile.
pub fn haar_annulus_check(t: f64) -> Result<HaarAnnulusReport> {
    let model = MultiplicativeBrown::new(SpectralMeasure::haar(), t)?;
    let row = model.row(0.0)?;
    // inverse of S: y = e^{−t−2tz} ⟺ z = (−t − ln y)/(2t)
    let s_transform = |z: f64| (-t - 2.0 * t * z).exp();
    let s_inv = |y: f64| (-t - y.ln()) / (2.0 * t);
    let inner = s_transform(-1.0).powf(-0.5);
    let outer = (1.0 / s_transform(0.0)).sqrt();
    let n = 201;
    let mut samples = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for k in 0..n {
        let rho = inner * (outer / inner).powf(k as f64 / (n - 1) as f64);
        let hl = (1.0 + s_inv(rho.powi(-2))).clamp(0.0, 1.0);
        // ∫_{r_t}^{ρ} (w/ρ'²)·2πρ' dρ'
        let radial = if rho <= row.r {
            0.0
        } else {
            romberg(row.r, rho, 1e-14, |x| Ok(row.w * TWO_PI / x))?
        };
        worst = worst.max((hl - radial).abs());
        samples.push((rho, hl, radial));
    }
    Ok(HaarAnnulusReport {
        t,
        inner_radius: inner,
        outer_radius: outer,
        samples,
        max_discrepancy: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_atoms(t: f64) -> MultiplicativeBrown {
        MultiplicativeBrown::new(
            SpectralMeasure::circle_atomic([
                (2.0 * PI / 5.0, 1.0 / 3.0),
                (3.0 * PI / 4.0, 2.0 / 3.0),
            ])
            .unwrap(),
            t,
        )
        .unwrap()
    }

    fn delta(alpha: f64, t: f64) -> MultiplicativeBrown {
        MultiplicativeBrown::new(SpectralMeasure::circle_point_mass(alpha).unwrap(), t).unwrap()
    }

    fn haar(t: f64) -> MultiplicativeBrown {
        MultiplicativeBrown::new(SpectralMeasure::haar(), t).unwrap()
    }

    #[test]
    fn angles_on_atoms_are_inside_the_arcs() {
        for t in [0.05, 0.8, 3.0] {
            let m = two_atoms(t);
            for atom in m.measure().atoms() {
                let theta = atom.location;
                assert!(m.arcs().iter().any(|arc| arc.lift(theta).is_some()));
                let row = m.row(theta).unwrap();
                assert!(row.r < 1.0 && row.w > 0.0 && row.w <= 1.0 / (PI * t) + 1e-9);
                assert!(m.root_residual(theta).unwrap() <= 1e-10 / t);
            }
        }
    }

    /// f straight from the r-form ½(1 − r²)/(−log r) Σ w/(1 − 2r cos δ + r²).
    fn f_direct(alphas: &[(f64, f64)], r: f64, theta: f64) -> f64 {
        let s: f64 = alphas
            .iter()
            .map(|&(a, w)| w / (1.0 - 2.0 * r * (theta - a).cos() + r * r))
            .sum();
        0.5 * (1.0 - r * r) / (-r.ln()) * s
    }

    #[test]
    fn f_value_examples() {
        let h = SpectralMeasure::haar();
        assert_abs_diff_eq!(
            f_value(&h, 0.5, 1.3).unwrap(),
            1.0 / (2.0 * 2f64.ln()),
            epsilon = 1e-15
        );
        let d = SpectralMeasure::circle_point_mass(0.0).unwrap();
        assert_abs_diff_eq!(
            f_value(&d, 0.5, PI).unwrap(),
            0.5 * (0.75 / 2f64.ln()) / 2.25,
            epsilon = 1e-15
        );
        assert!(f_value(&d, 1e-300, 0.0).unwrap() < 1e-2);
        assert_eq!(
            f_value(&d, 2.0, 0.7).unwrap(),
            f_value(&d, 0.5, 0.7).unwrap()
        );
        for r in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(matches!(f_value(&d, r, 0.0), Err(Error::InvalidRadius(_))));
        }
        assert!(f_value(&SpectralMeasure::point_mass(0.0).unwrap(), 0.5, 0.0).is_err());
    }

    #[test]
    fn f_value_matches_r_form() {
        let mu = [(2.0 * PI / 5.0, 1.0 / 3.0), (3.0 * PI / 4.0, 2.0 / 3.0)];
        let mu_bar = SpectralMeasure::circle_atomic(mu.iter().map(|&(a, w)| (-a, w))).unwrap();
        for r in [1e-3, 0.1, 0.5, 0.9, 0.999, 0.999999] {
            for theta in [-3.0, -1.0, 0.0, 1.2, 2.0, 3.1] {
                let a = f_value(&mu_bar, r, theta).unwrap();
                let b = f_direct(&mu, r, theta);
                assert!((a - b).abs() <= 1e-9 * b, "r={r} θ={theta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn t_of_lambda_examples() {
        let h = SpectralMeasure::haar();
        let l2 = 2.0 * 2f64.ln();
        assert_abs_diff_eq!(
            t_of_lambda(&h, ComplexPoint::new(0.5, 0.0)).unwrap(),
            l2,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            t_of_lambda(&h, ComplexPoint::new(2.0, 0.0)).unwrap(),
            l2,
            epsilon = 1e-14
        );
        let d = SpectralMeasure::circle_point_mass(0.0).unwrap();
        assert_abs_diff_eq!(
            t_of_lambda(&d, ComplexPoint::from_polar(1.0, PI)).unwrap(),
            4.0,
            epsilon = 1e-14
        );
        assert_eq!(t_of_lambda(&d, ComplexPoint::new(1.0, 0.0)).unwrap(), 0.0);
        assert!(matches!(
            t_of_lambda(&d, ComplexPoint::new(0.0, 0.0)),
            Err(Error::ZeroLambda)
        ));
        let z = ComplexPoint::from_polar(0.4, 0.9);
        let a = t_of_lambda(&d, z).unwrap();
        let b = t_of_lambda(&d, 1.0 / z.conj()).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn r_t_examples() {
        assert_abs_diff_eq!(
            haar(1.0).r_t(0.4).unwrap(),
            (-0.5f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            haar(0.2).r_t(-2.0).unwrap(),
            (-0.1f64).exp(),
            epsilon = 1e-15
        );
        // f(1⁻, π/2) = ½ ≤ 1
        assert_eq!(delta(0.0, 1.0).r_t(PI / 2.0).unwrap(), 1.0);
        let m = delta(0.0, 1.0);
        let r = m.r_t(0.5).unwrap();
        assert!(r < 1.0);
        assert!((f_direct(&[(0.0, 1.0)], r, 0.5) - 1.0).abs() < 1e-12);
        assert!(MultiplicativeBrown::new(SpectralMeasure::haar(), 0.0).is_err());
    }

    #[test]
    fn phi_map_examples() {
        let z = haar(1.0).phi_map(ComplexPoint::new(0.3, 0.0)).unwrap();
        assert_abs_diff_eq!(z.re, 0.3 * 0.5f64.exp(), epsilon = 1e-15);
        assert_eq!(
            two_atoms(0.8)
                .phi_map(ComplexPoint::new(0.0, 0.0))
                .unwrap()
                .norm(),
            0.0
        );
        let m = delta(0.0, 1.0);
        for theta in [-0.9, -0.3, 0.0, 0.5, 1.0] {
            let r = m.r_t(theta).unwrap();
            let w = m.phi_map(ComplexPoint::from_polar(r, theta)).unwrap();
            assert!((w.norm() - 1.0).abs() < 1e-10);
        }
        assert!(matches!(
            m.phi_map(ComplexPoint::new(1.0, 0.0)),
            Err(Error::PoleAtAtom { .. })
        ));
    }

    #[test]
    fn phi_of_theta_examples() {
        assert_abs_diff_eq!(haar(0.7).phi_of_theta(1.1).unwrap(), 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(
            delta(0.0, 1.0).phi_of_theta(0.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let m = two_atoms(0.8);
        let phi = m.phi_of_theta(2.0).unwrap();
        let z = m
            .phi_map(ComplexPoint::from_polar(m.r_t(2.0).unwrap(), 2.0))
            .unwrap();
        let d = normalize_angle(phi - z.arg());
        assert!(d.abs() < 1e-9);
        assert!(matches!(
            delta(0.0, 1.0).phi_of_theta(2.0),
            Err(Error::OutsideU(_))
        ));
    }

    #[test]
    fn density_examples() {
        assert_abs_diff_eq!(
            haar(1.0).density_w_theta(0.3).unwrap(),
            1.0 / TWO_PI,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            haar(4.0).density_w_theta(0.3).unwrap(),
            1.0 / (8.0 * PI),
            epsilon = 1e-15
        );
        let m = two_atoms(0.8);
        for arc in m.arcs() {
            for frac in [0.05, 0.2, 0.5, 0.8, 0.95] {
                let x = normalize_angle(arc.start + frac * (arc.end - arc.start));
                let h = 1e-6;
                let fd = (m.phi_of_theta(x + h).unwrap() - m.phi_of_theta(x - h).unwrap())
                    / (2.0 * h)
                    / (TWO_PI * 0.8);
                assert_abs_diff_eq!(m.density_w_theta(x).unwrap(), fd, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn arcs_examples() {
        let a = haar(1.0).arcs().to_vec();
        assert_eq!(a, vec![Arc::full_circle()]);
        let a = delta(0.0, 1.0).arcs().to_vec();
        assert_eq!(a.len(), 1);
        assert_abs_diff_eq!(a[0].start, -PI / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(a[0].end, PI / 3.0, epsilon = 1e-14);
        // an arc straddling ±π keeps its end past π
        let a = delta(PI, 1.0).arcs().to_vec();
        assert_abs_diff_eq!(a[0].start, 2.0 * PI / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(a[0].end, 4.0 * PI / 3.0, epsilon = 1e-14);
        // t > 4: a single atom's U is the whole circle
        assert!(delta(0.0, 4.5).arcs()[0].is_full());
        // the atoms at 2π/5 and 3π/4 are close enough that the gap between
        // them already lies in U at t = 0.8
        assert_eq!(two_atoms(0.8).arcs().len(), 1);
        assert_eq!(two_atoms(0.1).arcs().len(), 2);
    }

    #[test]
    fn arcs_match_sign_scan() {
        for t in [0.2, 0.8, 1.5, 3.0] {
            let m = two_atoms(t);
            let scan: Vec<f64> = angle_grid(400_000)
                .windows(2)
                .filter(|p| (m.r_t(p[0]).unwrap() < 1.0) != (m.r_t(p[1]).unwrap() < 1.0))
                .map(|p| 0.5 * (p[0] + p[1]))
                .collect();
            let mut ends: Vec<f64> = m
                .arcs()
                .iter()
                .flat_map(|a| [normalize_angle(a.start), normalize_angle(a.end)])
                .collect();
            ends.sort_by(f64::total_cmp);
            assert_eq!(ends.len(), scan.len(), "t = {t}");
            for (e, s) in ends.iter().zip(&scan) {
                assert!((e - s).abs() < 1e-4, "t = {t}: {e} vs {s}");
            }
            // endpoints shifted by 2π can move by an ulp, and r_t has a
            // square-root edge, hence the slack
            for a in m.arcs() {
                assert!(m.r_t(a.start).unwrap() > 1.0 - 1e-7);
                assert!(m.r_t(a.end).unwrap() > 1.0 - 1e-7);
            }
        }
    }

    #[test]
    fn profile_rows() {
        assert!(haar(1.0).profile(15).is_err());
        let p = delta(0.0, 1.0).profile(1441).unwrap();
        assert_eq!(p.rows.len(), 1441);
        assert_eq!(p.rows[1440].theta, PI);
        assert!(p.rows[0].theta > -PI);
        for r in &p.rows {
            assert!(r.r > 0.0 && r.r <= 1.0);
            assert_eq!(r.w == 0.0, r.r == 1.0);
            assert!(r.arg_density >= 0.0);
            assert_eq!(r.r < 1.0, r.theta.abs() < PI / 3.0);
        }
        // φ continuous along an arc that straddles ±π
        let m = delta(PI, 1.0);
        let mut phis: Vec<f64> = Vec::new();
        for k in 1..200 {
            let x = normalize_angle(2.0 * PI / 3.0 + (2.0 * PI / 3.0) * k as f64 / 200.0);
            phis.push(m.phi_of_theta(x).unwrap());
        }
        assert!(phis.windows(2).all(|p| p[1] > p[0] && p[1] - p[0] < 0.1));
    }

    #[test]
    fn masses() {
        for m in [two_atoms(0.8), delta(0.0, 1.0), delta(1.0, 5.0), haar(1.0)] {
            assert_abs_diff_eq!(m.total_mass().unwrap(), 1.0, epsilon = 1e-7);
            assert_abs_diff_eq!(m.law_mass().unwrap(), 1.0, epsilon = 1e-6);
        }
    }

    /// Moments of free unitary Brownian motion:
    /// e^{−kt/2} Σ_{j<k} (−t)^j/j! · k^{j−1} · C(k, j+1).
    fn unitary_bm_moment(k: u32, t: f64) -> f64 {
        let binom =
            |n: u32, r: u32| (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
        let mut s = 0.0;
        let mut fact = 1.0;
        for j in 0..k {
            if j > 0 {
                fact *= j as f64;
            }
            s += (-t).powi(j as i32) / fact * (k as f64).powi(j as i32 - 1) * binom(k, j + 1);
        }
        (-(k as f64) * t / 2.0).exp() * s
    }

    #[test]
    fn law_is_rotated_unitary_brownian_motion() {
        for (alpha, t) in [(0.0, 1.0), (1.0, 0.5), (-2.5, 2.0), (0.3, 6.0)] {
            let m = delta(alpha, t);
            for k in 1..=4 {
                let got = m.law_moment(k).unwrap();
                let want = Complex64::from_polar(unitary_bm_moment(k as u32, t), k as f64 * alpha);
                assert!(
                    (got - want).norm() < 1e-6,
                    "α={alpha} t={t} k={k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn haar_law_is_uniform() {
        let m = haar(1.0);
        assert_abs_diff_eq!(m.law_moment(0).unwrap().re, 1.0, epsilon = 1e-12);
        for k in 1..=5 {
            assert!(m.law_moment(k).unwrap().norm() < 1e-10);
        }
        let (phi, p) = m.law_density(0.7).unwrap();
        assert_eq!(phi, 0.7);
        assert_abs_diff_eq!(p, 1.0 / TWO_PI, epsilon = 1e-15);
    }

    #[test]
    fn inversion_symmetry() {
        let m = two_atoms(0.8);
        for theta in [1.0, 1.8, 2.2, 2.7] {
            let r = m.r_t(theta).unwrap();
            for rho in [r * 1.01, 0.9, 1.0, 1.05, 0.99 / r] {
                let a = m
                    .brown_density(ComplexPoint::from_polar(rho, theta))
                    .unwrap();
                let b = m
                    .brown_density(ComplexPoint::from_polar(1.0 / rho, theta))
                    .unwrap();
                assert!((a * rho.powi(2) - m.density_w_theta(theta).unwrap()).abs() < 1e-15);
                assert!((a - b * rho.powi(-4)).abs() <= 1e-12 * a);
            }
            assert_eq!(
                m.brown_density(ComplexPoint::from_polar(r * 0.99, theta))
                    .unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn haar_annulus() {
        for t in [0.25, 1.0, 4.0] {
            let rep = haar_annulus_check(t).unwrap();
            assert!(
                rep.max_discrepancy <= 1e-12,
                "t = {t}: {}",
                rep.max_discrepancy
            );
            assert_abs_diff_eq!(rep.inner_radius, (-t / 2.0).exp(), epsilon = 1e-15);
            assert_abs_diff_eq!(rep.outer_radius, (t / 2.0).exp(), epsilon = 1e-14);
        }
        let rep = haar_annulus_check(1.0).unwrap();
        let last = rep.samples.last().unwrap();
        assert_abs_diff_eq!(last.1, 1.0, epsilon = 1e-14);
        let mid = rep.samples[100];
        assert_abs_diff_eq!(mid.0, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mid.1, 0.5, epsilon = 1e-14);
        assert!(haar_annulus_check(-1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn boundary_identities(t in 0.1f64..5.0, theta in -PI..PI) {
            let m = two_atoms(t);
            let row = m.row(theta).unwrap();
            prop_assert!(row.r > 0.0 && row.r <= 1.0);
            if row.r < 1.0 {
                prop_assert!(m.root_residual(theta).unwrap() <= 1e-10 / t);
                let z = m.phi_map(ComplexPoint::from_polar(row.r, theta)).unwrap();
                prop_assert!((z.norm() - 1.0).abs() <= 1e-9);
                prop_assert!(normalize_angle(z.arg() - row.phi).abs() <= 1e-9);
                let dphi = m.phi_derivative(theta).unwrap();
                prop_assert!(dphi > 0.0 && dphi <= 2.0 + 1e-9);
                prop_assert!(row.w <= 1.0 / (PI * t) + 1e-9);
                prop_assert!((row.arg_density + 2.0 * row.r.ln() * row.w).abs() < 1e-15);
            } else {
                prop_assert_eq!(row.w, 0.0);
                prop_assert_eq!(row.arg_density, 0.0);
            }
        }

        #[test]
        fn haar_closed_forms(t in 0.05f64..8.0, theta in -PI..PI) {
            let m = haar(t);
            let row = m.row(theta).unwrap();
            prop_assert!((row.r - (-t / 2.0).exp()).abs() <= 1e-12);
            prop_assert_eq!(row.phi, theta);
            prop_assert!((row.w - 1.0 / (TWO_PI * t)).abs() <= 1e-12);
        }
    }
}
