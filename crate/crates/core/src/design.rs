//! Covariance models and Gaussian design matrices with rows `X_i ~ N(0, Σ)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, PartialEq)]
pub enum CovarianceKind {
    Identity,
    /// `Σ_kj = ρ^{|k-j|}`.
    Toeplitz { rho: f64 },
    Explicit(DMatrix<f64>),
}

/// A validated population covariance together with its lower Cholesky factor.
///
/// Immutable after construction; share it across threads behind an `Arc`.
#[derive(Clone, Debug)]
pub struct CovarianceSpec {
    kind: CovarianceKind,
    sigma: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl CovarianceSpec {
    pub fn identity(p: usize) -> Result<Self> {
        build_covariance(CovarianceKind::Identity, p)
    }

    pub fn toeplitz(p: usize, rho: f64) -> Result<Self> {
        build_covariance(CovarianceKind::Toeplitz { rho }, p)
    }

    pub fn explicit(sigma: DMatrix<f64>) -> Result<Self> {
        let p = sigma.nrows();
        build_covariance(CovarianceKind::Explicit(sigma), p)
    }

    pub fn kind(&self) -> &CovarianceKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, CovarianceKind::Identity)
    }

    /// Quadratic form `vᵀ Σ v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let p = self.dim();
        let mut acc = 0.0;
        for i in 0..p {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..p {
                acc += v[i] * self.sigma[(i, j)] * v[j];
            }
        }
        acc
    }
}

pub fn build_covariance(kind: CovarianceKind, p: usize) -> Result<CovarianceSpec> {
    if p == 0 {
        return Err(Error::BadShape("dimension p must be at least 1".into()));
    }
    let sigma = match &kind {
        CovarianceKind::Identity => DMatrix::identity(p, p),
        CovarianceKind::Toeplitz { rho } => {
            if !(rho.abs() < 1.0) {
                return Err(Error::BadCorrelation(*rho));
            }
            DMatrix::from_fn(p, p, |k, j| rho.powi(k.abs_diff(j) as i32))
        }
        CovarianceKind::Explicit(m) => {
            if m.nrows() != p || !linalg::is_symmetric(m, 0.0) {
                return Err(Error::NotSymmetric);
            }
            m.clone()
        }
    };
    let chol = linalg::cholesky_lower(&sigma)
        .map_err(|(index, pivot)| Error::NonPositiveDefinite { index, pivot })?;
    Ok(CovarianceSpec { kind, sigma, chol })
}

/// An `n × p` design; row `i` is observation `X_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    data: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::BadShape("design needs n >= 1 and p >= 1".into()));
        }
        Ok(Self { data })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }
}

/// Draws `n` i.i.d. rows from `N(0, Σ)` as `Z Lᵀ`.
pub fn sample_design_with<R: Rng + ?Sized>(
    spec: &CovarianceSpec,
    n: usize,
    rng: &mut R,
) -> Result<DesignMatrix> {
    let p = spec.dim();
    if n == 0 {
        return Err(Error::BadShape("sample size n must be at least 1".into()));
    }
    // row-major fill so the stream layout does not depend on storage order
    let z: Vec<f64> = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    let z = DMatrix::from_row_slice(n, p, &z);
    let x = if spec.is_identity() {
        z
    } else {
        z * spec.cholesky().transpose()
    };
    DesignMatrix::new(x)
}

pub fn sample_design(spec: &CovarianceSpec, n: usize, seed: u64) -> Result<DesignMatrix> {
    sample_design_with(spec, n, &mut rng_from_seed(seed))
}

/// Sample covariance `n⁻¹ 𝕏ᵀ𝕏` (the rows have known mean zero).
pub fn empirical_covariance(x: &DesignMatrix) -> DMatrix<f64> {
    x.matrix().tr_mul(x.matrix()) / x.rows() as f64
}
