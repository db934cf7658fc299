//! Primal-dual witness diagnostics.
//!
//! Given a candidate support `S₀`, the witness solves the LASSO restricted to
//! `S₀`, completes the subgradient off the support through
//!
//! `Z_j = 𝕏_jᵀ[𝕏_S(𝕏_Sᵀ𝕏_S)⁻¹ž_S + P⊥(w / λn)]`,  `w = 𝐘 − c₀𝕏β₀`,
//!
//! and measures how far the restricted solution sits from `c₀β₀` through
//!
//! `Δ = (n⁻¹𝕏_Sᵀ𝕏_S)⁻¹[n⁻¹𝕏_Sᵀw − λ sign(c₀β₀_S)]`.
//!
//! `max |Z_j| < 1` certifies that the full LASSO solution is unique and
//! supported inside `S₀`; sign consistency of `c₀β₀ + Δ` then pins its signs.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lasso::{fit_problem, LassoOptions, Problem};
use crate::linalg;
use crate::models::Dataset;
use crate::support::{Sign, SignedSupport};

/// Slack allowed on `|ž_j| ≤ 1` for coordinates the restricted fit sets to zero.
pub const SUBGRADIENT_SLACK: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct RestrictedFit {
    /// `β̌_S`, aligned with the support indices.
    pub beta: DVector<f64>,
    /// `ž_S`.
    pub subgradient: DVector<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PdwReport {
    pub support: Vec<usize>,
    pub lambda: f64,
    pub c0: f64,
    pub restricted_beta: Vec<f64>,
    pub subgradient: Vec<f64>,
    /// Off-support indices, aligned with `z_values`.
    pub complement: Vec<usize>,
    pub z_values: Vec<f64>,
    pub max_abs_z: f64,
    pub delta_values: Vec<f64>,
    pub strict_dual_feasible: bool,
    pub sign_consistent: bool,
    /// `S±(c₀β₀)`, the support a successful witness certifies.
    pub target: SignedSupport,
}

fn validate_support(p: usize, n: usize, support: &[usize]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut seen = vec![false; p];
    for &j in support {
        if j >= p {
            return Err(Error::InvalidSupport(format!("index {j} out of range for p = {p}")));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::InvalidSupport(format!("duplicate index {j}")));
        }
    }
    if support.len() >= n {
        return Err(Error::SingularGram);
    }
    Ok(())
}

/// Support columns plus the Cholesky factor of their Gram matrix `𝕏_Sᵀ𝕏_S / n`.
struct SupportBlock {
    x_s: DMatrix<f64>,
    chol: DMatrix<f64>,
    n: f64,
}

impl SupportBlock {
    fn new(dataset: &Dataset, support: &[usize]) -> Result<Self> {
        validate_support(dataset.p(), dataset.n(), support)?;
        let n = dataset.n() as f64;
        let x_s = dataset.x().select_columns(support);
        let gram = x_s.tr_mul(&x_s) / n;
        let chol = linalg::cholesky_lower(&gram).map_err(|_| Error::SingularGram)?;
        Ok(Self { x_s, chol, n })
    }

    /// `(n⁻¹𝕏_Sᵀ𝕏_S)⁻¹ v`
    fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        linalg::cholesky_solve(&self.chol, v)
    }

    /// `P⊥ v = v − 𝕏_S(𝕏_Sᵀ𝕏_S)⁻¹𝕏_Sᵀ v`
    fn project_out(&self, v: &DVector<f64>) -> DVector<f64> {
        let coef = self.solve(&(self.x_s.tr_mul(v) / self.n));
        v - &self.x_s * coef
    }
}

/// `w = 𝐘 − c₀𝕏β₀`.
pub fn witness_noise(dataset: &Dataset, c0: f64) -> DVector<f64> {
    dataset.y() - dataset.index() * c0
}

/// LASSO restricted to the columns in `support`, with the KKT-forced subgradient.
pub fn restricted_lasso(dataset: &Dataset, support: &[usize], lambda: f64) -> Result<RestrictedFit> {
    let block = SupportBlock::new(dataset, support)?;
    let problem = Problem::new(&block.x_s, dataset.y(), false)?;
    let opts = LassoOptions { tol: 1e-12, ..LassoOptions::default() };
    let fit = fit_problem(&problem, lambda, None, &opts)?;
    let r = problem.residual_correlations(&fit.beta);
    let mut z = DVector::zeros(support.len());
    for k in 0..support.len() {
        z[k] = match Sign::of(fit.beta[k]) {
            Some(s) => s.value(),
            None => r[k] / lambda,
        };
        if z[k].abs() > 1.0 + SUBGRADIENT_SLACK {
            return Err(Error::InfeasibleSubgradient { index: support[k], value: z[k] });
        }
    }
    Ok(RestrictedFit { beta: fit.beta, subgradient: z })
}

/// `Z_j` for every `j ∉ support`, in increasing index order.
pub fn dual_variables(
    dataset: &Dataset,
    support: &[usize],
    lambda: f64,
    subgradient: &DVector<f64>,
    c0: f64,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::BadLambda(lambda));
    }
    let block = SupportBlock::new(dataset, support)?;
    if subgradient.len() != support.len() {
        return Err(Error::DimensionMismatch(format!(
            "subgradient has length {}, support has {}",
            subgradient.len(),
            support.len()
        )));
    }
    let w = witness_noise(dataset, c0);
    let lifted = &block.x_s * block.solve(subgradient) / block.n;
    let v = lifted + block.project_out(&w) / (lambda * block.n);
    let complement = linalg::complement(dataset.p(), support);
    Ok(complement.iter().map(|&j| dataset.x().column(j).dot(&v)).collect())
}

/// `Δ_j` for `j ∈ support`; `signs` holds `sign(c₀β₀_j)` (0 allowed).
pub fn sign_perturbations(
    dataset: &Dataset,
    support: &[usize],
    lambda: f64,
    c0: f64,
    signs: &[f64],
) -> Result<Vec<f64>> {
    let block = SupportBlock::new(dataset, support)?;
    if signs.len() != support.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} signs for a support of size {}",
            signs.len(),
            support.len()
        )));
    }
    let w = witness_noise(dataset, c0);
    let rhs = block.x_s.tr_mul(&w) / block.n - DVector::from_column_slice(signs) * lambda;
    Ok(block.solve(&rhs).iter().copied().collect())
}

/// `P⊥ = I − 𝕏_S(𝕏_Sᵀ𝕏_S)⁻¹𝕏_Sᵀ` as an explicit `n × n` matrix.
pub fn orthogonal_projector(dataset: &Dataset, support: &[usize]) -> Result<DMatrix<f64>> {
    let block = SupportBlock::new(dataset, support)?;
    let n = dataset.n();
    let mut proj = DMatrix::identity(n, n);
    let inv = linalg::cholesky_inverse(&block.chol) / block.n;
    proj -= &block.x_s * inv * block.x_s.transpose();
    Ok(proj)
}

fn sign_value(v: f64) -> f64 {
    Sign::of(v).map_or(0.0, Sign::value)
}

pub fn pdw_check(dataset: &Dataset, support: &[usize], lambda: f64, c0: f64) -> Result<PdwReport> {
    let restricted = restricted_lasso(dataset, support, lambda)?;
    let z_values = dual_variables(dataset, support, lambda, &restricted.subgradient, c0)?;
    let truth = dataset.truth.values();
    let target_signs: Vec<f64> = support.iter().map(|&j| sign_value(c0 * truth[j])).collect();
    let delta_values = sign_perturbations(dataset, support, lambda, c0, &target_signs)?;

    let max_abs_z = z_values.iter().fold(0.0_f64, |m, z| m.max(z.abs()));
    let sign_consistent = support
        .iter()
        .zip(&delta_values)
        .zip(&target_signs)
        .all(|((&j, &d), &s)| sign_value(c0 * truth[j] + d) == s);
    Ok(PdwReport {
        support: support.to_vec(),
        lambda,
        c0,
        restricted_beta: restricted.beta.iter().copied().collect(),
        subgradient: restricted.subgradient.iter().copied().collect(),
        complement: linalg::complement(dataset.p(), support),
        max_abs_z,
        strict_dual_feasible: max_abs_z < 1.0,
        z_values,
        delta_values,
        sign_consistent,
        target: dataset.truth.support().scaled_by(c0),
    })
}
