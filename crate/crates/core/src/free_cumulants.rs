//! Moment ↔ free cumulant conversion, used as a brute-force oracle for the
//! law of x₀ + s_t.
//!
//! With `M(z) = Σ_{n≥0} m_n zⁿ`, the moment-cumulant relation reads
//! `m_n = Σ_{s=1}^{n} κ_s [z^{n−s}] M(z)^s`, which can be solved for either
//! sequence one order at a time.

use crate::error::{Error, Result};
use crate::measure::SpectralMeasure;

/// Highest supported order.
pub const MAX_ORDER: usize = 12;

fn check_order(k: usize) -> Result<()> {
    if k > MAX_ORDER {
        Err(Error::OrderTooLarge(k))
    } else {
        Ok(())
    }
}

/// m_1..m_k of a real-atomic measure.
pub fn moments_of_measure(mu: &SpectralMeasure, k: usize) -> Result<Vec<f64>> {
    mu.require_real()?;
    check_order(k)?;
    Ok((1..=k)
        .map(|n| {
            mu.atoms()
                .iter()
                .map(|a| a.weight * a.location.powi(n as i32))
                .sum()
        })
        .collect())
}

/// Σ_{s=1}^{n−1} κ_s [z^{n−s}] M(z)^s, given m_0..m_{n−1} and κ_1..κ_{n−1}.
fn lower_order_part(moments: &[f64], cumulants: &[f64], n: usize) -> f64 {
    // M truncated to degree n − 1; successive powers kept to the same degree
    let m: Vec<f64> = std::iter::once(1.0)
        .chain(moments[..n - 1].iter().copied())
        .collect();
    let mut power = vec![1.0];
    let mut total = 0.0;
    for s in 1..n {
        let mut next = vec![0.0; n];
        for (i, &p) in power.iter().enumerate() {
            for (j, &q) in m.iter().enumerate() {
                if i + j < n {
                    next[i + j] += p * q;
                }
            }
        }
        power = next;
        total += cumulants[s - 1] * power[n - s];
    }
    total
}

/// κ_1..κ_K from m_1..m_K.
pub fn moments_to_free_cumulants(moments: &[f64]) -> Result<Vec<f64>> {
    check_order(moments.len())?;
    let mut kappa = Vec::with_capacity(moments.len());
    for n in 1..=moments.len() {
        let rest = lower_order_part(moments, &kappa, n);
        kappa.push(moments[n - 1] - rest);
    }
    Ok(kappa)
}

/// m_1..m_K from κ_1..κ_K.
pub fn free_cumulants_to_moments(cumulants: &[f64]) -> Result<Vec<f64>> {
    check_order(cumulants.len())?;
    let mut moments: Vec<f64> = Vec::with_capacity(cumulants.len());
    for n in 1..=cumulants.len() {
        let rest = lower_order_part(&moments, cumulants, n);
        moments.push(cumulants[n - 1] + rest);
    }
    Ok(moments)
}

/// Moments m_1..m_k of μ ⊞ σ_t: the semicircle only adds t to κ_2.
pub fn free_additive_with_semicircle(mu: &SpectralMeasure, t: f64, k: usize) -> Result<Vec<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NonpositiveTime(t));
    }
    let moments = moments_of_measure(mu, k)?;
    // σ_0 = δ_0, and skipping the round trip keeps the moments bit-exact
    if t == 0.0 || k < 2 {
        return Ok(moments);
    }
    let mut kappa = moments_to_free_cumulants(&moments)?;
    kappa[1] += t;
    free_cumulants_to_moments(&kappa)
}
