#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use simsupport::design::DesignMatrix;
use simsupport::models::leading_beta;
use simsupport::{CovarianceSpec, Dataset, Link, SimModelSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Wraps raw `(X, Y)` into a dataset whose truth is the leading `s` coordinates.
pub fn raw_dataset(x: DMatrix<f64>, y: DVector<f64>, s: usize) -> Dataset {
    let cov = Arc::new(CovarianceSpec::identity(x.ncols()).unwrap());
    Dataset {
        truth: leading_beta(&cov, s).unwrap(),
        design: DesignMatrix::new(x).unwrap(),
        response: y,
        model: SimModelSpec::new(Link::Linear),
        covariance: cov,
    }
}

/// Residual correlations `n⁻¹Xᵀ(y − Xβ)` computed from the raw design.
pub fn direct_residual_correlations(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> DVector<f64> {
    x.tr_mul(&(y - x * beta)) / x.nrows() as f64
}

/// `‖y − Xβ‖²/(2n) + λ‖β‖₁` computed from the raw design.
pub fn direct_objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> f64 {
    (y - x * beta).norm_squared() / (2.0 * x.nrows() as f64) + lambda * beta.lp_norm(1)
}

/// Largest deviation from the subgradient conditions: `r_j = λ sign(β_j)` on
/// the active set and `|r_j| ≤ λ` elsewhere.
pub fn direct_kkt_violation(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> f64 {
    let r = direct_residual_correlations(x, y, beta);
    (0..beta.len())
        .map(|j| {
            if beta[j] != 0.0 {
                (r[j] - lambda * beta[j].signum()).abs()
            } else {
                (r[j].abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// `∫ g(z) φ(z) dz` by the composite trapezoid rule on [−10, 10].
pub fn gaussian_expectation(g: impl Fn(f64) -> f64) -> f64 {
    let m = 40_000;
    let h = 20.0 / m as f64;
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    (0..=m)
        .map(|k| {
            let z = -10.0 + k as f64 * h;
            let w = if k == 0 || k == m { 0.5 } else { 1.0 };
            w * g(z) * (-0.5 * z * z).exp() / norm
        })
        .sum::<f64>()
        * h
}

/// `c₀ = E[φ′(Z)]` from the derivative of each link's mean response.
pub fn stein_c0(link: Link) -> f64 {
    match link {
        Link::SinPlusLinear => gaussian_expectation(|z| 1.0 + z.cos()),
        Link::TwoAtan => gaussian_expectation(|z| 2.0 / (1.0 + z * z)),
        Link::Cube => gaussian_expectation(|z| 3.0 * z * z),
        Link::Sinh => gaussian_expectation(f64::cosh),
        Link::Linear => 1.0,
        Link::Logistic => gaussian_expectation(|z| {
            let e = (-z.abs()).exp();
            e / ((1.0 + e) * (1.0 + e))
        }),
    }
}
