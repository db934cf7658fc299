use nalgebra::DVector;

use super::{fit_problem, LassoFit, LassoOptions, Problem};
use crate::error::{Error, Result};
use crate::models::Dataset;
use crate::support::SignedSupport;

/// Warm-started fits over a strictly descending λ grid.
#[derive(Clone, Debug)]
pub struct LassoPath {
    pub grid: Vec<f64>,
    pub fits: Vec<LassoFit>,
}

impl LassoPath {
    pub fn all_converged(&self) -> bool {
        self.fits.iter().all(|f| f.converged)
    }
}

/// `grid_size` log-spaced values from `lambda_max` down to
/// `lambda_max · lambda_min_ratio`; the endpoints are exact.
pub fn lambda_grid(lambda_max: f64, grid_size: usize, lambda_min_ratio: f64) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::InvalidConfig(format!("grid size must be at least 2, got {grid_size}")));
    }
    if !(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "lambda_min_ratio must lie in (0, 1), got {lambda_min_ratio}"
        )));
    }
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(Error::BadLambda(lambda_max));
    }
    let last = grid_size - 1;
    let step = lambda_min_ratio.ln() / last as f64;
    Ok((0..grid_size)
        .map(|k| match k {
            0 => lambda_max,
            k if k == last => lambda_max * lambda_min_ratio,
            k => lambda_max * (step * k as f64).exp(),
        })
        .collect())
}

pub fn path(
    dataset: &Dataset,
    grid_size: usize,
    lambda_min_ratio: f64,
    opts: &LassoOptions,
) -> Result<LassoPath> {
    let problem = Problem::from_dataset(dataset, opts.center)?;
    let grid = lambda_grid(problem.lambda_max(), grid_size, lambda_min_ratio)?;
    path_on(&problem, &grid, opts, None)
}

/// Fits along `grid` (strictly descending, positive) with warm starts.
///
/// With `max_nnz = Some(k)` the path stops after the first fit with more
/// than `k` nonzero coefficients.
pub fn path_on(
    problem: &Problem,
    grid: &[f64],
    opts: &LassoOptions,
    max_nnz: Option<usize>,
) -> Result<LassoPath> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty lambda grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidConfig("lambda grid must be strictly descending".into()));
    }
    let mut fits: Vec<LassoFit> = Vec::with_capacity(grid.len());
    let mut warm = DVector::zeros(problem.dim());
    for &lambda in grid {
        let f = fit_problem(problem, lambda, Some(&warm), opts)?;
        warm.copy_from(&f.beta);
        let stop = max_nnz.is_some_and(|k| f.nnz() > k);
        fits.push(f);
        if stop {
            break;
        }
    }
    let grid = grid[..fits.len()].to_vec();
    Ok(LassoPath { grid, fits })
}

/// First fit on the path whose signed support equals `truth`.
pub fn path_contains_true_support<'a>(path: &'a LassoPath, truth: &SignedSupport) -> Option<&'a LassoFit> {
    path.fits.iter().find(|f| f.signed_support() == *truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::CovarianceSpec;
    use crate::models::{generate, leading_beta, Link, SimModelSpec};
    use crate::support::Sign;
    use std::sync::Arc;

    fn sample(link: Link, noise: f64, n: usize, p: usize, s: usize, seed: u64) -> Dataset {
        let cov = Arc::new(CovarianceSpec::identity(p).unwrap());
        let beta = leading_beta(&cov, s).unwrap();
        let model = SimModelSpec { link, noise_scale: noise };
        generate(&cov, &beta, &model, n, seed).unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = lambda_grid(2.0, 2, 0.1).unwrap();
        assert_eq!(g, vec![2.0, 2.0 * 0.1]);
        let g = lambda_grid(1.0, 5, 1e-2).unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[2] - 0.1).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!(lambda_grid(1.0, 1, 0.1).is_err());
        assert!(lambda_grid(1.0, 3, 1.0).is_err());
        assert!(lambda_grid(1.0, 3, 0.0).is_err());
    }

    #[test]
    fn first_point_is_zero() {
        let d = sample(Link::SinPlusLinear, 1.0, 60, 20, 3, 1);
        let pth = path(&d, 20, 1e-2, &LassoOptions::default()).unwrap();
        assert_eq!(pth.fits.len(), 20);
        assert_eq!(pth.fits[0].nnz(), 0);
        assert!(pth.all_converged());
        assert!(pth.fits.last().unwrap().nnz() > 3);
    }

    #[test]
    fn rejects_unsorted_grid() {
        let d = sample(Link::Linear, 1.0, 20, 5, 2, 1);
        let problem = Problem::from_dataset(&d, false).unwrap();
        assert!(path_on(&problem, &[0.1, 0.2], &LassoOptions::default(), None).is_err());
        assert!(path_on(&problem, &[0.1, 0.1], &LassoOptions::default(), None).is_err());
    }

    #[test]
    fn early_stop_on_sparsity() {
        let d = sample(Link::Linear, 1.0, 40, 30, 3, 5);
        let problem = Problem::from_dataset(&d, false).unwrap();
        let grid = lambda_grid(problem.lambda_max(), 50, 1e-3).unwrap();
        let pth = path_on(&problem, &grid, &LassoOptions::default(), Some(5)).unwrap();
        assert!(pth.fits.len() < 50);
        assert!(pth.fits.last().unwrap().nnz() > 5);
        assert!(pth.fits[..pth.fits.len() - 1].iter().all(|f| f.nnz() <= 5));
    }

    #[test]
    fn containment() {
        let d = sample(Link::Linear, 0.0, 200, 20, 3, 3);
        let pth = path(&d, 50, 1e-3, &LassoOptions::default()).unwrap();
        assert!(path_contains_true_support(&pth, &SignedSupport::empty()).is_some());
        let hit = path_contains_true_support(&pth, d.truth.support()).expect("noiseless recovery");
        assert!(hit.lambda < pth.grid[0]);
        let wrong = SignedSupport::new(vec![(0, Sign::Positive)]).unwrap();
        let zeros = LassoPath { grid: vec![1.0], fits: vec![pth.fits[0].clone()] };
        assert!(path_contains_true_support(&zeros, &wrong).is_none());
    }
}
