//! Population-level quantities that govern LASSO support recovery:
//! irrepresentability, spectrum of the support block, the conditional
//! covariance of off-support covariates, and the sample-size and signal
//! thresholds built from them.
//!
//! All thresholds carry unknown absolute constants; values are meaningful up
//! to those constants only.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::design::CovarianceSpec;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub support: Vec<usize>,
    /// `‖Σ_{Sᶜ,S} Σ_{S,S}⁻¹‖_{∞,∞}`
    pub irrep_norm: f64,
    /// `1 − irrep_norm`
    pub kappa: f64,
    pub irrepresentable: bool,
    /// Extreme eigenvalues of `Σ_{S,S}`.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `D_max(Σ_{Sᶜ|S})`, the largest conditional variance off the support.
    pub d_max_cond: f64,
    /// `D_max(Σ_{Sᶜ,Sᶜ})`.
    pub d_max_complement: f64,
    /// `‖Σ_{S,S}^{-1/2}‖_{∞,∞} · ‖Σ_{S,S}^{1/2}‖_{∞,∞}`
    pub rho_inf: f64,
    /// `‖Σ_{S,S}^{-1/2}‖_{∞,∞}`
    pub inv_sqrt_inf_norm: f64,
    /// `n / (s ln(p − s))` when a sample size was supplied.
    pub n_eff: Option<f64>,
}

/// `n_{p,s} = n / (s ln(p − s))`.
pub fn effective_sample_size(n: usize, p: usize, s: usize) -> Result<f64> {
    if s == 0 || n == 0 || p < s + 2 {
        return Err(Error::BadShape(format!(
            "need n >= 1, s >= 1 and p - s >= 2; got n = {n}, p = {p}, s = {s}"
        )));
    }
    Ok(n as f64 / (s as f64 * ((p - s) as f64).ln()))
}

/// Inverse of [`effective_sample_size`], rounded up: `⌈n_eff · s · ln(p − s)⌉`.
pub fn sample_size_for(n_eff: f64, p: usize, s: usize) -> Result<usize> {
    if s == 0 || p < s + 2 || !(n_eff > 0.0) {
        return Err(Error::BadShape(format!("invalid (n_eff, p, s) = ({n_eff}, {p}, {s})")));
    }
    Ok((n_eff * s as f64 * ((p - s) as f64).ln()).ceil() as usize)
}

fn validate(p: usize, support: &[usize]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut seen = vec![false; p];
    for &j in support {
        if j >= p || std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidSupport(format!("bad or repeated index {j}")));
        }
    }
    if support.len() == p {
        return Err(Error::BadShape("support must be a proper subset".into()));
    }
    Ok(())
}

struct Blocks {
    ss_chol: DMatrix<f64>,
    ss: DMatrix<f64>,
    cs: DMatrix<f64>,
    cc: DMatrix<f64>,
}

fn blocks(spec: &CovarianceSpec, support: &[usize]) -> Result<Blocks> {
    validate(spec.dim(), support)?;
    let comp = linalg::complement(spec.dim(), support);
    let sigma = spec.matrix();
    let ss = linalg::submatrix(sigma, support, support);
    let ss_chol = linalg::cholesky_lower(&ss).map_err(|_| Error::SingularBlock)?;
    Ok(Blocks {
        ss_chol,
        ss,
        cs: linalg::submatrix(sigma, &comp, support),
        cc: linalg::submatrix(sigma, &comp, &comp),
    })
}

/// `Σ_{Sᶜ|S} = Σ_{Sᶜ,Sᶜ} − Σ_{Sᶜ,S} Σ_{S,S}⁻¹ Σ_{S,Sᶜ}`.
pub fn schur_complement(spec: &CovarianceSpec, support: &[usize]) -> Result<DMatrix<f64>> {
    let b = blocks(spec, support)?;
    let inv = linalg::cholesky_inverse(&b.ss_chol);
    Ok(&b.cc - &b.cs * inv * b.cs.transpose())
}

pub fn check_conditions(
    spec: &CovarianceSpec,
    support: &[usize],
    n: Option<usize>,
) -> Result<ConditionReport> {
    let b = blocks(spec, support)?;
    let inv = linalg::cholesky_inverse(&b.ss_chol);
    let irrep_norm = linalg::inf_norm(&(&b.cs * &inv));
    let schur = &b.cc - &b.cs * &inv * b.cs.transpose();
    let eig = linalg::sym_eigenvalues(&b.ss);
    let sqrt = linalg::sym_power(&b.ss, 0.5);
    let inv_sqrt = linalg::sym_power(&b.ss, -0.5);
    let inv_sqrt_inf_norm = linalg::inf_norm(&inv_sqrt);
    let n_eff = n
        .map(|n| effective_sample_size(n, spec.dim(), support.len()))
        .transpose()?;
    Ok(ConditionReport {
        support: support.to_vec(),
        irrep_norm,
        kappa: 1.0 - irrep_norm,
        irrepresentable: irrep_norm < 1.0,
        lambda_min: eig[0],
        lambda_max: eig[eig.len() - 1],
        d_max_cond: schur.diagonal().amax(),
        d_max_complement: b.cc.diagonal().amax(),
        rho_inf: inv_sqrt_inf_norm * linalg::inf_norm(&sqrt),
        inv_sqrt_inf_norm,
        n_eff,
    })
}

/// `λ_T = √((ξ² + 1) · 4 C_T D_max(Σ_{Sᶜ|S}) / κ² · ln(p − s) / n)`.
pub fn theoretical_lambda(
    xi2: f64,
    c_t: f64,
    d_max_cond: f64,
    kappa: f64,
    n: usize,
    p: usize,
    s: usize,
) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::BadKappa(kappa));
    }
    if !(c_t > 1.0) {
        return Err(Error::InvalidConfig(format!("C_T must exceed 1, got {c_t}")));
    }
    if n == 0 || p < s + 2 {
        return Err(Error::BadShape(format!("need n >= 1 and p - s >= 2; got n = {n}, p = {p}, s = {s}")));
    }
    let log_term = ((p - s) as f64).ln() / n as f64;
    Ok(((xi2 + 1.0) * 4.0 * c_t * d_max_cond / (kappa * kappa) * log_term).sqrt())
}

/// Effective sample size required for `S(β̂) ⊆ S(c₀β₀)`:
/// `4 D_max (4/λ_min + (ξ² + 1)/(λ² s)) / κ²`.
pub fn theorem1_part_i_threshold(
    d_max_cond: f64,
    lambda_min: f64,
    xi2: f64,
    lambda: f64,
    kappa: f64,
    s: usize,
) -> f64 {
    4.0 * d_max_cond * (4.0 / lambda_min + (xi2 + 1.0) / (lambda * lambda * s as f64)) / (kappa * kappa)
}

/// The same requirement when `λ = λ_T`: `16 D_max / ((1 − 1/C_T) κ² λ_min)`.
pub fn part_i_threshold_at_lambda_t(d_max_cond: f64, lambda_min: f64, kappa: f64, c_t: f64) -> f64 {
    16.0 * d_max_cond / ((1.0 - 1.0 / c_t) * kappa * kappa * lambda_min)
}

/// Unknown positive constants of the minimum-signal condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignalConstants {
    pub upsilon0: f64,
    pub upsilon1: f64,
    pub upsilon2: f64,
}

impl Default for SignalConstants {
    fn default() -> Self {
        Self { upsilon0: 1.0, upsilon1: 1.0, upsilon2: 1.0 }
    }
}

/// Minimum signal `β₀^min` required for sign consistency, up to constants:
///
/// `‖Σ_SS^{-1/2}‖² λ Υ₀ + [Υ₁ ρ_∞ √(s/(n ln(p−s))) ‖β₀‖_∞ + Υ₂ ‖Σ_SS^{-1/2}‖ / √s] n_{p,s}^{-1/2}`
pub fn min_signal_threshold(
    report: &ConditionReport,
    lambda: f64,
    constants: &SignalConstants,
    beta_inf: f64,
    n: usize,
    p: usize,
    s: usize,
) -> Result<f64> {
    let n_eff = effective_sample_size(n, p, s)?;
    let norm = report.inv_sqrt_inf_norm;
    let sf = s as f64;
    let first = norm * norm * lambda * constants.upsilon0;
    let bracket = constants.upsilon1
        * report.rho_inf
        * (sf / (n as f64 * ((p - s) as f64).ln())).sqrt()
        * beta_inf
        + constants.upsilon2 * norm / sf.sqrt();
    Ok(first + bracket / n_eff.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_sample_size_values() {
        let v = effective_sample_size(1000, 100, 10).unwrap();
        assert!((v - 1000.0 / (10.0 * 90f64.ln())).abs() < 1e-12);
        assert!((v - 22.223).abs() < 1e-3);
        assert!(matches!(effective_sample_size(10, 3, 2), Err(Error::BadShape(_))));
        assert!(effective_sample_size(10, 5, 0).is_err());
    }

    #[test]
    fn sample_size_rounding() {
        // 10 · 4 · ln 12 = 99.39…
        assert_eq!(sample_size_for(10.0, 16, 4).unwrap(), 100);
        assert!(sample_size_for(-1.0, 16, 4).is_err());
    }

    #[test]
    fn lambda_t_values() {
        let v = theoretical_lambda(1.0, 2.0, 1.0, 0.5, 1000, 100, 10).unwrap();
        assert!((v - (64.0 * 90f64.ln() / 1000.0).sqrt()).abs() < 1e-12);
        assert!((v - 0.5366).abs() < 1e-4);
        let v = theoretical_lambda(0.0, 2.0, 0.5, 1.0, 400, 20, 4).unwrap();
        assert!((v - (4.0 * 16f64.ln() / 400.0).sqrt()).abs() < 1e-12);
        assert!((v - 0.1665).abs() < 1e-4);
        let a = theoretical_lambda(1.0, 2.0, 1.0, 0.5, 1000, 100, 10).unwrap();
        let b = theoretical_lambda(1.0, 2.0, 1.0, 1.0, 1000, 100, 10).unwrap();
        assert!((b * b - a * a / 4.0).abs() < 1e-14);
        assert!(matches!(theoretical_lambda(1.0, 2.0, 1.0, 0.0, 10, 10, 2), Err(Error::BadKappa(_))));
        assert!(theoretical_lambda(1.0, 1.0, 1.0, 0.5, 10, 10, 2).is_err());
    }

    #[test]
    fn part_i_values() {
        assert!((theorem1_part_i_threshold(1.0, 1.0, 1.0, 1.0, 1.0, 2) - 20.0).abs() < 1e-12);
        let a = theorem1_part_i_threshold(0.7, 0.4, 2.0, 0.3, 0.5, 3);
        let b = theorem1_part_i_threshold(0.7, 0.4, 2.0, 0.3, 2.0, 3);
        assert!((a * 0.25 - b * 4.0).abs() < 1e-12);
        assert_eq!(theorem1_part_i_threshold(0.0, 1.0, 1.0, 1.0, 1.0, 2), 0.0);
    }

    #[test]
    fn threshold_at_lambda_t_is_consistent() {
        let (d, lmin, xi2, kappa, c_t) = (0.8, 0.5, 1.7, 0.6, 3.0);
        let (p, s) = (200, 6);
        for n in [50usize, 400, 3000, 20000] {
            let n_eff = effective_sample_size(n, p, s).unwrap();
            let lambda = theoretical_lambda(xi2, c_t, d, kappa, n, p, s).unwrap();
            let general = theorem1_part_i_threshold(d, lmin, xi2, lambda, kappa, s);
            // at λ_T the second term equals n_eff / C_T
            assert!((general - 16.0 * d / (kappa * kappa * lmin) - n_eff / c_t).abs() < 1e-9);
            let special = part_i_threshold_at_lambda_t(d, lmin, kappa, c_t);
            assert_eq!(n_eff >= general, n_eff >= special);
        }
    }

    #[test]
    fn identity_report() {
        let id = CovarianceSpec::identity(10).unwrap();
        let r = check_conditions(&id, &[2, 5, 7], Some(500)).unwrap();
        assert_eq!(r.irrep_norm, 0.0);
        assert_eq!(r.kappa, 1.0);
        assert!((r.lambda_min - 1.0).abs() < 1e-14 && (r.lambda_max - 1.0).abs() < 1e-14);
        assert_eq!(r.d_max_cond, 1.0);
        assert!((r.rho_inf - 1.0).abs() < 1e-14);
        assert!(r.n_eff.is_some());
    }

    #[test]
    fn guards() {
        let id = CovarianceSpec::identity(3).unwrap();
        assert!(matches!(check_conditions(&id, &[], None), Err(Error::EmptySupport)));
        assert!(check_conditions(&id, &[0, 1, 2], None).is_err());
        assert!(check_conditions(&id, &[0, 0], None).is_err());
        assert!(check_conditions(&id, &[3], None).is_err());
    }

    #[test]
    fn zero_constants_give_zero_signal() {
        let id = CovarianceSpec::identity(100).unwrap();
        let r = check_conditions(&id, &(0..10).collect::<Vec<_>>(), None).unwrap();
        let zero = SignalConstants { upsilon0: 0.0, upsilon1: 0.0, upsilon2: 0.0 };
        assert_eq!(min_signal_threshold(&r, 0.1, &zero, 0.3, 1000, 100, 10).unwrap(), 0.0);
    }
}
