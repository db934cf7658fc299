//! Outcome transformations `Ỹ = g(Y)` applied before fitting, and a
//! diagnostic for whether any transformation can carry signal.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Dataset;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformSpec {
    #[default]
    Identity,
    /// `F_n(Yᵢ)`: average rank divided by `n`.
    EmpiricalCdf,
    /// `F_n(Yᵢ) − 1/2`.
    CenteredCdf,
    /// Piecewise-linear map through `(input, output)` knots with
    /// nondecreasing outputs; constant beyond the end knots.
    UserTable { knots: Vec<(f64, f64)> },
}

impl TransformSpec {
    /// Builds a table transform, checking that inputs strictly increase and
    /// outputs do not decrease.
    pub fn user_table(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidConfig("transform table needs at least one knot".into()));
        }
        if knots.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidConfig("transform table must be finite".into()));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0) || w[1].1 < w[0].1) {
            return Err(Error::InvalidConfig("transform table must be monotone".into()));
        }
        Ok(TransformSpec::UserTable { knots })
    }

    /// CLI spelling: `none`, `cdf` or `cdf-centered`.
    pub fn from_flag(flag: &str) -> Result<Self> {
        match flag {
            "none" | "identity" => Ok(TransformSpec::Identity),
            "cdf" => Ok(TransformSpec::EmpiricalCdf),
            "cdf-centered" => Ok(TransformSpec::CenteredCdf),
            other => Err(Error::InvalidConfig(format!("unknown transform {other:?}"))),
        }
    }
}

/// Average ranks (1-based); tied values share the mean of their positions.
fn average_ranks(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && y[order[end]] == y[order[start]] {
            end += 1;
        }
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = knots.partition_point(|&(a, _)| a <= x);
    let (x0, y0) = knots[k - 1];
    let (x1, y1) = knots[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

pub fn apply_transform(response: &DVector<f64>, spec: &TransformSpec) -> DVector<f64> {
    let n = response.len() as f64;
    match spec {
        TransformSpec::Identity => response.clone(),
        TransformSpec::EmpiricalCdf => {
            DVector::from_iterator(response.len(), average_ranks(response.as_slice()).into_iter().map(|r| r / n))
        }
        TransformSpec::CenteredCdf => centered_cdf_transform(response),
        TransformSpec::UserTable { knots } => response.map(|y| interpolate(knots, y)),
    }
}

pub fn centered_cdf_transform(response: &DVector<f64>) -> DVector<f64> {
    apply_transform(response, &TransformSpec::EmpiricalCdf).add_scalar(-0.5)
}

impl Dataset {
    /// The same design and truth with `g(Y)` as the response.
    pub fn transformed(&self, spec: &TransformSpec) -> Dataset {
        match spec {
            TransformSpec::Identity => self.clone(),
            _ => Dataset { response: apply_transform(&self.response, spec), ..self.clone() },
        }
    }
}

/// Estimates `Var{E(Xᵀβ₀ | Y)}` by grouping observations into `bins`
/// quantile bins of `Y` and taking the size-weighted variance of the
/// within-bin means of `Xᵀβ₀`.
pub fn variance_of_conditional_mean(dataset: &Dataset, bins: usize) -> Result<f64> {
    let n = dataset.n();
    if bins < 2 {
        return Err(Error::TooFewSamples(format!("need at least 2 bins, got {bins}")));
    }
    if n < 2 * bins {
        return Err(Error::TooFewSamples(format!("n = {n} is too small for {bins} bins")));
    }
    let y = dataset.y().as_slice();
    let index = dataset.index();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));

    let overall = index.mean();
    let mut total = 0.0;
    for b in 0..bins {
        let lo = b * n / bins;
        let hi = (b + 1) * n / bins;
        let mean = order[lo..hi].iter().map(|&i| index[i]).sum::<f64>() / (hi - lo) as f64;
        total += (hi - lo) as f64 * (mean - overall).powi(2);
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn identity_unchanged() {
        let y = v(&[0.3, -2.0, 7.0]);
        assert_eq!(apply_transform(&y, &TransformSpec::Identity), y);
    }

    #[test]
    fn cdf_ranks() {
        let t = apply_transform(&v(&[3.0, 1.0, 2.0]), &TransformSpec::EmpiricalCdf);
        assert_eq!(t, v(&[1.0, 1.0 / 3.0, 2.0 / 3.0]));
        let t = apply_transform(&v(&[5.0; 4]), &TransformSpec::EmpiricalCdf);
        assert!(t.iter().all(|&x| x == 5.0 / 8.0));
        let t = apply_transform(&v(&[1.0, 2.0, 2.0, 3.0]), &TransformSpec::EmpiricalCdf);
        assert_eq!(t, v(&[0.25, 0.625, 0.625, 1.0]));
    }

    #[test]
    fn centered_values() {
        assert_eq!(centered_cdf_transform(&v(&[1.0, 2.0])), v(&[0.0, 0.5]));
        assert_eq!(centered_cdf_transform(&v(&[4.0])), v(&[0.5]));
        assert_eq!(apply_transform(&v(&[2.0, 1.0]), &TransformSpec::CenteredCdf), v(&[0.5, 0.0]));
    }

    #[test]
    fn table_interpolation() {
        let t = TransformSpec::user_table(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 2.0)]).unwrap();
        let out = apply_transform(&v(&[-1.0, 0.5, 1.0, 2.0, 9.0]), &t);
        assert_eq!(out, v(&[0.0, 1.0, 2.0, 2.0, 2.0]));
        assert!(TransformSpec::user_table(vec![(0.0, 1.0), (1.0, 0.0)]).is_err());
        assert!(TransformSpec::user_table(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(TransformSpec::user_table(vec![]).is_err());
    }

    #[test]
    fn flags() {
        assert_eq!(TransformSpec::from_flag("none").unwrap(), TransformSpec::Identity);
        assert_eq!(TransformSpec::from_flag("cdf").unwrap(), TransformSpec::EmpiricalCdf);
        assert_eq!(TransformSpec::from_flag("cdf-centered").unwrap(), TransformSpec::CenteredCdf);
        assert!(TransformSpec::from_flag("log").is_err());
    }
}
