//! L1-regularised least squares
//!
//! `argmin_β (1/2n)‖𝐘 − 𝕏β‖² + λ‖β‖₁`
//!
//! solved by cyclic coordinate descent on the sufficient statistics
//! `G = 𝕏ᵀ𝕏/n` and `c = 𝕏ᵀ𝐘/n`. Convergence is certified by the maximum
//! violation of the subgradient (KKT) conditions, not by coefficient change.

mod cv;
mod path;

pub use cv::{cross_validate, cross_validate_xy, CvResult};
pub use path::{lambda_grid, path, path_contains_true_support, path_on, LassoPath};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::Dataset;
use crate::screening::soft_threshold;
use crate::support::{Sign, SignedSupport};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LassoOptions {
    /// Target maximum KKT violation.
    pub tol: f64,
    /// Maximum number of full coordinate sweeps.
    pub max_iter: usize,
    /// Center columns and response (fits an unpenalised intercept).
    pub center: bool,
    /// After descent, re-solve the stationarity equations exactly on the
    /// active set and keep that solution if it certifies better.
    pub polish: bool,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100_000,
            center: false,
            polish: true,
        }
    }
}

/// Sufficient statistics of one least-squares problem.
#[derive(Clone, Debug)]
pub struct Problem {
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    half_mean_sq_y: f64,
    n: usize,
    x_means: Option<DVector<f64>>,
    y_mean: f64,
}

impl Problem {
    pub fn new(x: &DMatrix<f64>, y: &DVector<f64>, center: bool) -> Result<Self> {
        let (n, p) = x.shape();
        if n == 0 || p == 0 {
            return Err(Error::BadShape("empty design".into()));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!("response length {} vs n = {n}", y.len())));
        }
        let nf = n as f64;
        if center {
            let x_means = DVector::from_iterator(p, x.column_iter().map(|c| c.sum() / nf));
            let y_mean = y.sum() / nf;
            let mut xc = x.clone();
            for (j, mut col) in xc.column_iter_mut().enumerate() {
                col.add_scalar_mut(-x_means[j]);
            }
            let yc = y.add_scalar(-y_mean);
            Ok(Self {
                gram: xc.tr_mul(&xc) / nf,
                xty: xc.tr_mul(&yc) / nf,
                half_mean_sq_y: yc.norm_squared() / (2.0 * nf),
                n,
                x_means: Some(x_means),
                y_mean,
            })
        } else {
            Ok(Self {
                gram: x.tr_mul(x) / nf,
                xty: x.tr_mul(y) / nf,
                half_mean_sq_y: y.norm_squared() / (2.0 * nf),
                n,
                x_means: None,
                y_mean: 0.0,
            })
        }
    }

    pub fn from_dataset(dataset: &Dataset, center: bool) -> Result<Self> {
        Self::new(dataset.x(), dataset.y(), center)
    }

    /// Restriction to the columns in `cols`.
    pub fn restricted(&self, cols: &[usize]) -> Problem {
        Problem {
            gram: linalg::submatrix(&self.gram, cols, cols),
            xty: DVector::from_iterator(cols.len(), cols.iter().map(|&j| self.xty[j])),
            half_mean_sq_y: self.half_mean_sq_y,
            n: self.n,
            x_means: self.x_means.as_ref().map(|m| DVector::from_iterator(cols.len(), cols.iter().map(|&j| m[j]))),
            y_mean: self.y_mean,
        }
    }

    pub fn dim(&self) -> usize {
        self.xty.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `n⁻¹𝕏ᵀ𝕏`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `n⁻¹𝕏ᵀ𝐘`.
    pub fn xty(&self) -> &DVector<f64> {
        &self.xty
    }

    /// Smallest λ with an all-zero solution: `‖n⁻¹𝕏ᵀ𝐘‖_∞`.
    pub fn lambda_max(&self) -> f64 {
        self.xty.amax()
    }

    /// Correlation of each column with the current residual, `n⁻¹𝕏ᵀ(𝐘 − 𝕏β)`.
    pub fn residual_correlations(&self, beta: &DVector<f64>) -> DVector<f64> {
        let mut r = self.xty.clone();
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                r.axpy(-b, &self.gram.column(j), 1.0);
            }
        }
        r
    }

    pub fn objective(&self, beta: &DVector<f64>, lambda: f64) -> f64 {
        let r = self.residual_correlations(beta);
        self.objective_with(beta, &r, lambda)
    }

    // (1/2n)‖y − Xβ‖² = ‖y‖²/2n − βᵀc + ½βᵀGβ = ‖y‖²/2n − ½βᵀ(c + r)
    fn objective_with(&self, beta: &DVector<f64>, r: &DVector<f64>, lambda: f64) -> f64 {
        let mut quad = 0.0;
        let mut l1 = 0.0;
        for j in 0..beta.len() {
            if beta[j] != 0.0 {
                quad += beta[j] * (self.xty[j] + r[j]);
                l1 += beta[j].abs();
            }
        }
        self.half_mean_sq_y - 0.5 * quad + lambda * l1
    }

    fn intercept(&self, beta: &DVector<f64>) -> f64 {
        match &self.x_means {
            Some(m) => self.y_mean - m.dot(beta),
            None => 0.0,
        }
    }
}

/// Maximum violation of the LASSO subgradient conditions given the residual
/// correlations `r = n⁻¹𝕏ᵀ(𝐘 − 𝕏β)`.
pub fn kkt_violation(beta: &DVector<f64>, r: &DVector<f64>, lambda: f64) -> f64 {
    beta.iter()
        .zip(r.iter())
        .map(|(&b, &rj)| match Sign::of(b) {
            Some(s) => (rj - lambda * s.value()).abs(),
            None => (rj.abs() - lambda).max(0.0),
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct LassoFit {
    pub lambda: f64,
    pub beta: DVector<f64>,
    /// Unpenalised intercept; zero unless the problem was centered.
    pub intercept: f64,
    pub kkt_residual: f64,
    pub objective: f64,
    /// Full coordinate sweeps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Objective value before the first sweep and after every sweep.
    pub objective_trace: Vec<f64>,
}

impl LassoFit {
    pub fn signed_support(&self) -> SignedSupport {
        SignedSupport::from_vector(self.beta.iter())
    }

    pub fn nnz(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        (x * &self.beta).add_scalar(self.intercept)
    }
}

/// Single fit at penalty `lambda` starting from zero.
pub fn fit(dataset: &Dataset, lambda: f64, opts: &LassoOptions) -> Result<LassoFit> {
    let problem = Problem::from_dataset(dataset, opts.center)?;
    fit_problem(&problem, lambda, None, opts)
}

pub fn fit_problem(
    problem: &Problem,
    lambda: f64,
    warm: Option<&DVector<f64>>,
    opts: &LassoOptions,
) -> Result<LassoFit> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::BadLambda(lambda));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let p = problem.dim();
    let mut beta = match warm {
        Some(w) if w.len() == p => w.clone(),
        Some(w) => {
            return Err(Error::DimensionMismatch(format!("warm start of length {} vs p = {p}", w.len())))
        }
        None => DVector::zeros(p),
    };
    let gram = problem.gram.as_slice();
    let mut r = problem.residual_correlations(&beta);
    let mut trace = vec![problem.objective_with(&beta, &r, lambda)];
    let mut kkt = kkt_violation(&beta, &r, lambda);
    let mut sweeps = 0;

    while kkt > opts.tol && sweeps < opts.max_iter {
        sweeps += 1;
        for j in 0..p {
            let gjj = gram[j * p + j];
            let old = beta[j];
            if gjj <= 0.0 {
                // all-zero column: the coordinate never moves
                continue;
            }
            let new = soft_threshold(r[j] + gjj * old, lambda) / gjj;
            if new != old {
                let delta = new - old;
                let col = &gram[j * p..(j + 1) * p];
                for (ri, gi) in r.iter_mut().zip(col) {
                    *ri -= gi * delta;
                }
                beta[j] = new;
            }
        }
        // recompute from scratch so rounding does not accumulate across sweeps
        r = problem.residual_correlations(&beta);
        trace.push(problem.objective_with(&beta, &r, lambda));
        kkt = kkt_violation(&beta, &r, lambda);
    }

    if opts.polish {
        if let Some((polished, pr)) = polish(problem, &beta, lambda) {
            let pk = kkt_violation(&polished, &pr, lambda);
            if pk <= kkt {
                beta = polished;
                r = pr;
                kkt = pk;
            }
        }
    }

    Ok(LassoFit {
        lambda,
        intercept: problem.intercept(&beta),
        objective: problem.objective_with(&beta, &r, lambda),
        kkt_residual: kkt,
        iterations: sweeps,
        converged: kkt <= opts.tol,
        objective_trace: trace,
        beta,
    })
}

/// Solves `G_AA β_A = c_A − λ sign(β_A)` on the current active set `A`;
/// returns the solution only if it keeps the same signs.
fn polish(problem: &Problem, beta: &DVector<f64>, lambda: f64) -> Option<(DVector<f64>, DVector<f64>)> {
    let active: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
    if active.is_empty() || active.len() > problem.n {
        return None;
    }
    let g = linalg::submatrix(&problem.gram, &active, &active);
    let l = linalg::cholesky_lower(&g).ok()?;
    let rhs = DVector::from_iterator(
        active.len(),
        active.iter().map(|&j| problem.xty[j] - lambda * beta[j].signum()),
    );
    let sol = linalg::cholesky_solve(&l, &rhs);
    let mut out = DVector::zeros(beta.len());
    for (k, &j) in active.iter().enumerate() {
        if Sign::of(sol[k]) != Sign::of(beta[j]) {
            return None;
        }
        out[j] = sol[k];
    }
    let r = problem.residual_correlations(&out);
    Some((out, r))
}
