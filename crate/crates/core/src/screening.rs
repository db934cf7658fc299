//! Covariance screening and the identity-design soft-threshold LASSO.
//!
//! With `𝕏ᵀ𝕏/n` replaced by the identity, the LASSO decouples into
//! coordinate-wise soft-thresholding of the empirical covariances
//! `V = n⁻¹ Σᵢ YᵢXᵢ`. Screening keeps exactly the coordinates with
//! `|V_j| > ν √(ln p / n)` together with their signs.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::Dataset;
use crate::support::{Sign, SignedSupport};

#[derive(Clone, Debug, Serialize)]
pub struct ScreeningResult {
    pub v: Vec<f64>,
    pub threshold: f64,
    pub selected: SignedSupport,
}

/// `V = n⁻¹ 𝕏ᵀ𝐘`.
pub fn empirical_covariances(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    x.tr_mul(y) / x.nrows() as f64
}

/// Cutoff `ν √(ln p / n)`.
pub fn screening_threshold(nu: f64, n: usize, p: usize) -> f64 {
    nu * ((p as f64).ln() / n as f64).sqrt()
}

pub fn covariance_screen(dataset: &Dataset, nu: f64) -> Result<ScreeningResult> {
    screen_xy(dataset.x(), dataset.y(), nu)
}

pub fn screen_xy(x: &DMatrix<f64>, y: &DVector<f64>, nu: f64) -> Result<ScreeningResult> {
    if !(nu > 0.0) {
        return Err(Error::BadThreshold(nu));
    }
    let (n, p) = x.shape();
    if n < 2 || p < 2 {
        return Err(Error::BadShape(format!("screening needs n >= 2 and p >= 2, got n = {n}, p = {p}")));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("response length {} vs n = {n}", y.len())));
    }
    let v = empirical_covariances(x, y);
    let threshold = screening_threshold(nu, n, p);
    let entries = v
        .iter()
        .enumerate()
        .filter(|(_, vj)| vj.abs() > threshold)
        .filter_map(|(j, &vj)| Sign::of(vj).map(|s| (j, s)))
        .collect();
    Ok(ScreeningResult {
        v: v.iter().copied().collect(),
        threshold,
        selected: SignedSupport::new(entries)?,
    })
}

/// Default multiplier `ν = 1/√s + 2√2·σ` for equal-magnitude signals `±1/√s`.
pub fn default_nu(s: usize, sigma: f64) -> f64 {
    1.0 / (s as f64).sqrt() + 2.0 * std::f64::consts::SQRT_2 * sigma
}

/// `σ̂ = √(n⁻¹ Σ Yᵢ²)`, the plug-in for `σ² = E(Y²)`.
pub fn estimate_sigma(y: &DVector<f64>) -> f64 {
    (y.norm_squared() / y.len() as f64).sqrt()
}

pub fn soft_threshold(v: f64, lambda: f64) -> f64 {
    if v > lambda {
        v - lambda
    } else if v < -lambda {
        v + lambda
    } else {
        0.0
    }
}

/// Closed-form identity-design LASSO: `β̂_j = sign(V_j)(|V_j| − λ)₊`.
pub fn soft_threshold_fit(dataset: &Dataset, lambda: f64) -> Result<DVector<f64>> {
    if !(lambda >= 0.0) {
        return Err(Error::BadLambda(lambda));
    }
    Ok(empirical_covariances(dataset.x(), dataset.y()).map(|v| soft_threshold(v, lambda)))
}
