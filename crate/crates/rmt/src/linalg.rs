//! Dense complex matrix helpers on top of faer.

use faer::{c64, Mat};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Target bound on the truncation error of [`expm`]: unit roundoff, since
/// each squaring doubles whatever error the scaled exponential carries.
pub const EXPM_TOL: f64 = f64::EPSILON / 2.0;

/// Maximum absolute column sum.
pub fn one_norm(a: &Mat<c64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn trace(a: &Mat<c64>) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// c₀ I + c₁ A + c₂ A².
fn quadratic(a: &Mat<c64>, a2: &Mat<c64>, c: [f64; 3]) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let id = if i == j { c[0] } else { 0.0 };
        c64::new(id, 0.0) + a[(i, j)] * c[1] + a2[(i, j)] * c[2]
    })
}

fn scaled(a: &Mat<c64>, s: f64) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

/// Matrix exponential: degree-9 Taylor polynomial in Paterson–Stockmeyer
/// form (four products), with scaling and squaring when the bound
/// ‖A³‖³‖A‖e^{‖A‖}/10! on the remainder exceeds [`EXPM_TOL`].
pub fn expm(a: &Mat<c64>) -> Mat<c64> {
    let mut a1 = a.clone();
    let mut a2 = &a1 * &a1;
    let mut a3 = &a2 * &a1;
    let (n1, n3) = (one_norm(&a1), one_norm(&a3));
    let fact10 = 3_628_800.0;
    let bound = |s: i32| {
        let k = 0.5f64.powi(s);
        let m1 = n1 * k;
        (n3 * k * k * k).powi(3) * m1 * m1.exp() / fact10
    };
    let mut squarings = 0;
    while bound(squarings) > EXPM_TOL && squarings < 64 {
        squarings += 1;
    }
    if squarings > 0 {
        let k = 0.5f64.powi(squarings);
        a1 = scaled(&a1, k);
        a2 = scaled(&a2, k * k);
        a3 = scaled(&a3, k * k * k);
    }
    let inv_fact = |k: i32| 1.0 / (1..=k).map(f64::from).product::<f64>();
    let b0 = quadratic(&a1, &a2, [1.0, 1.0, 0.5]);
    let b1 = quadratic(&a1, &a2, [inv_fact(3), inv_fact(4), inv_fact(5)]);
    let b2 = quadratic(&a1, &a2, [inv_fact(6), inv_fact(7), inv_fact(8)]);
    let inner = b2 + scaled(&a3, inv_fact(9));
    let inner = &a3 * &inner + b1;
    let mut e = &a3 * &inner + b0;
    for _ in 0..squarings {
        e = &e * &e;
    }
    e
}

/// n×n matrix of independent complex Gaussians with E|z|² = `variance`,
/// real and imaginary parts independent with variance `variance/2`.
/// Entries are drawn in row-major order.
pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, variance: f64, rng: &mut R) -> Mat<c64> {
    let s = (0.5 * variance).sqrt();
    let data: Vec<c64> = (0..n * n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c64::new(re * s, im * s)
        })
        .collect();
    Mat::from_fn(n, n, |i, j| data[i * n + j])
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// phases of diag(R) moved into Q.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<c64> {
    let g = gaussian_matrix(n, 1.0, rng);
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let phases: Vec<c64> = (0..n)
        .map(|j| {
            let d = r[(j, j)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                c64::new(1.0, 0.0)
            }
        })
        .collect();
    Mat::from_fn(n, n, |i, j| q[(i, j)] * phases[j])
}
