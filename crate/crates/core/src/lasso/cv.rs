use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::{path_on, LassoOptions, Problem};
use crate::error::{Error, Result};
use crate::models::Dataset;
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, Serialize)]
pub struct CvResult {
    pub best_lambda: f64,
    /// Candidate values, sorted descending.
    pub grid: Vec<f64>,
    /// Mean over folds of the held-out mean squared error, aligned with `grid`.
    pub cv_error: Vec<f64>,
}

/// Seeded balanced fold assignment: a shuffled position `i` goes to fold `i mod k`.
fn fold_of(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

pub fn cross_validate(
    dataset: &Dataset,
    grid: &[f64],
    k: usize,
    seed: u64,
    opts: &LassoOptions,
) -> Result<CvResult> {
    cross_validate_xy(dataset.x(), dataset.y(), grid, k, seed, opts)
}

/// K-fold cross-validation over `grid`; ties go to the larger λ.
pub fn cross_validate_xy(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    grid: &[f64],
    k: usize,
    seed: u64,
    opts: &LassoOptions,
) -> Result<CvResult> {
    let n = x.nrows();
    if k < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(Error::TooFewSamples(format!("n = {n} is smaller than the fold count {k}")));
    }
    if grid.is_empty() || grid.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::InvalidConfig("lambda grid must be non-empty and positive".into()));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();

    let fold = fold_of(n, k, seed);
    let per_fold: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..n).filter(|&i| fold[i] != f).collect();
            let test: Vec<usize> = (0..n).filter(|&i| fold[i] == f).collect();
            let problem = Problem::new(&x.select_rows(&train), &y.select_rows(&train), opts.center)?;
            let x_test = x.select_rows(&test);
            let y_test = y.select_rows(&test);
            let pth = path_on(&problem, &sorted, opts, None)?;
            Ok(pth
                .fits
                .iter()
                .map(|fit| (fit.predict(&x_test) - &y_test).norm_squared() / test.len() as f64)
                .collect())
        })
        .collect::<Result<_>>()?;

    let cv_error: Vec<f64> = (0..sorted.len())
        .map(|g| per_fold.iter().map(|e| e[g]).sum::<f64>() / k as f64)
        .collect();
    let mut best = 0;
    for g in 1..sorted.len() {
        if cv_error[g] < cv_error[best] {
            best = g;
        }
    }
    Ok(CvResult {
        best_lambda: sorted[best],
        grid: sorted,
        cv_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_balanced_and_seeded() {
        let f = fold_of(23, 5, 9);
        let mut counts = [0; 5];
        for &k in &f {
            counts[k] += 1;
        }
        assert!(counts.iter().all(|&c| c == 4 || c == 5));
        assert_eq!(f, fold_of(23, 5, 9));
        assert_ne!(f, fold_of(23, 5, 10));
    }

    #[test]
    fn single_candidate() {
        let x = DMatrix::from_fn(10, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let y = DVector::from_fn(10, |i, _| i as f64 - 4.5);
        let r = cross_validate_xy(&x, &y, &[0.3], 5, 1, &LassoOptions::default()).unwrap();
        assert_eq!(r.best_lambda, 0.3);
    }

    #[test]
    fn guards() {
        let x = DMatrix::from_element(3, 2, 1.0);
        let y = DVector::from_element(3, 1.0);
        let o = LassoOptions::default();
        assert!(matches!(cross_validate_xy(&x, &y, &[0.1], 4, 0, &o), Err(Error::TooFewSamples(_))));
        assert!(cross_validate_xy(&x, &y, &[0.1], 1, 0, &o).is_err());
        assert!(cross_validate_xy(&x, &y, &[], 2, 0, &o).is_err());
    }
}
