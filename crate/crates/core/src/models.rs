//! Sparse coefficient vectors and single-index responses `Y = f(Xᵀβ₀, ε)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::design::{sample_design_with, CovarianceSpec, DesignMatrix};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, rng_from_seed};
use crate::support::{Sign, SignedSupport};

/// Link functions of the simulation study plus the linear and logistic baselines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Link {
    /// `u + sin(u)`
    #[serde(rename = "sin_linear")]
    SinPlusLinear,
    /// `2 atan(u)`
    #[serde(rename = "atan2x")]
    TwoAtan,
    /// `u³`
    #[serde(rename = "cube")]
    Cube,
    /// `sinh(u)`
    #[serde(rename = "sinh")]
    Sinh,
    #[serde(rename = "linear")]
    Linear,
    /// Bernoulli outcome with `P(Y = 1 | X) = e^u / (1 + e^u)`.
    #[serde(rename = "logistic")]
    Logistic,
}

impl Link {
    pub const ALL: [Link; 6] = [
        Link::SinPlusLinear,
        Link::TwoAtan,
        Link::Cube,
        Link::Sinh,
        Link::Linear,
        Link::Logistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Link::SinPlusLinear => "sin_linear",
            Link::TwoAtan => "atan2x",
            Link::Cube => "cube",
            Link::Sinh => "sinh",
            Link::Linear => "linear",
            Link::Logistic => "logistic",
        }
    }

    /// Noise-free mean response `E[Y | Xᵀβ₀ = u]`.
    pub fn mean_response(self, u: f64) -> f64 {
        match self {
            Link::SinPlusLinear => u + u.sin(),
            Link::TwoAtan => 2.0 * u.atan(),
            Link::Cube => u * u * u,
            Link::Sinh => u.sinh(),
            Link::Linear => u,
            Link::Logistic => logistic(u),
        }
    }

    /// Population `c₀ = E[Z·φ(Z)]` with `Z ~ N(0, 1)`, by composite Simpson
    /// quadrature on `[-12, 12]`.
    pub fn population_c0(self) -> f64 {
        const HALF_WIDTH: f64 = 12.0;
        const INTERVALS: usize = 6000;
        let h = 2.0 * HALF_WIDTH / INTERVALS as f64;
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let g = |z: f64| z * self.mean_response(z) * norm * (-0.5 * z * z).exp();
        let mut acc = g(-HALF_WIDTH) + g(HALF_WIDTH);
        for k in 1..INTERVALS {
            let z = -HALF_WIDTH + k as f64 * h;
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(z);
        }
        acc * h / 3.0
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Link::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown link '{s}'")))
    }
}

/// Response model: a link plus additive `N(0, noise_scale²)` noise.
/// The logistic link draws a Bernoulli outcome and ignores `noise_scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimModelSpec {
    pub link: Link,
    #[serde(default = "unit_noise")]
    pub noise_scale: f64,
}

fn unit_noise() -> f64 {
    1.0
}

impl SimModelSpec {
    pub fn new(link: Link) -> Self {
        Self { link, noise_scale: 1.0 }
    }

    pub fn noiseless(link: Link) -> Self {
        Self { link, noise_scale: 0.0 }
    }
}

/// A sparse coefficient vector normalised so that `βᵀΣβ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    values: DVector<f64>,
    support: SignedSupport,
}

impl CoefficientVector {
    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn support(&self) -> &SignedSupport {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    /// `β^min`, the smallest nonzero magnitude.
    pub fn min_magnitude(&self) -> f64 {
        self.values
            .iter()
            .filter(|v| **v != 0.0)
            .map(|v| v.abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.amax()
    }
}

/// Equal-magnitude coefficients on `indices` with the given signs, scaled
/// so that `βᵀΣβ = 1`.
pub fn make_beta(
    spec: &CovarianceSpec,
    indices: &[usize],
    signs: &[Sign],
) -> Result<CoefficientVector> {
    if indices.len() != signs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} indices but {} signs",
            indices.len(),
            signs.len()
        )));
    }
    let mut raw = vec![0.0; spec.dim()];
    for (&j, &s) in indices.iter().zip(signs) {
        if j >= spec.dim() {
            return Err(Error::InvalidSupport(format!(
                "index {j} out of range for p = {}",
                spec.dim()
            )));
        }
        if raw[j] != 0.0 {
            return Err(Error::InvalidSupport(format!("duplicate index {j}")));
        }
        raw[j] = s.value();
    }
    make_beta_from_pattern(spec, &raw)
}

/// Rescales an arbitrary nonzero pattern so that `βᵀΣβ = 1`.
pub fn make_beta_from_pattern(spec: &CovarianceSpec, raw: &[f64]) -> Result<CoefficientVector> {
    if raw.len() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "pattern has length {}, covariance has p = {}",
            raw.len(),
            spec.dim()
        )));
    }
    if raw.iter().all(|v| *v == 0.0) {
        return Err(Error::EmptySupport);
    }
    let scale = spec.quadratic_form(raw).sqrt().recip();
    let values = DVector::from_iterator(raw.len(), raw.iter().map(|v| v * scale));
    let support = SignedSupport::from_vector(values.iter());
    Ok(CoefficientVector { values, support })
}

/// The simulation-study coefficient vector: support `{0, …, s-1}`, equal
/// magnitudes, first entry negative and the rest positive.
pub fn leading_beta(spec: &CovarianceSpec, s: usize) -> Result<CoefficientVector> {
    if s > spec.dim() {
        return Err(Error::InvalidSupport(format!("s = {s} exceeds p = {}", spec.dim())));
    }
    let indices: Vec<usize> = (0..s).collect();
    let signs: Vec<Sign> = (0..s)
        .map(|k| if k == 0 { Sign::Negative } else { Sign::Positive })
        .collect();
    make_beta(spec, &indices, &signs)
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub design: DesignMatrix,
    pub response: DVector<f64>,
    pub truth: CoefficientVector,
    pub model: SimModelSpec,
    pub covariance: Arc<CovarianceSpec>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.design.rows()
    }

    pub fn p(&self) -> usize {
        self.design.cols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        self.design.matrix()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.response
    }

    /// Single index `𝕏β₀`.
    pub fn index(&self) -> DVector<f64> {
        self.x() * self.truth.values()
    }

    /// Same design and truth with a different response vector.
    pub fn with_response(&self, response: DVector<f64>) -> Result<Dataset> {
        if response.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "response has length {}, design has {} rows",
                response.len(),
                self.n()
            )));
        }
        Ok(Dataset { response, ..self.clone() })
    }

    /// Signed support that sign-consistent recovery should return:
    /// `S±(c₀β₀)` with `c₀` the population constant of the link.
    pub fn recovery_target(&self) -> SignedSupport {
        self.truth.support().scaled_by(self.model.link.population_c0())
    }
}

/// The standard-normal noise stream used by [`generate`] for a given seed.
pub fn standard_noise(seed: u64, n: usize) -> DVector<f64> {
    let mut rng = rng_from_seed(mix_seed(&[seed, 1]));
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

pub fn generate(
    covariance: &Arc<CovarianceSpec>,
    truth: &CoefficientVector,
    model: &SimModelSpec,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    if truth.dim() != covariance.dim() {
        return Err(Error::DimensionMismatch(format!(
            "beta has length {}, covariance has p = {}",
            truth.dim(),
            covariance.dim()
        )));
    }
    let design = sample_design_with(covariance, n, &mut rng_from_seed(mix_seed(&[seed, 0])))?;
    let index = design.matrix() * truth.values();
    let response = match model.link {
        Link::Logistic => {
            let mut rng = rng_from_seed(mix_seed(&[seed, 1]));
            DVector::from_iterator(
                n,
                index.iter().map(|&u| {
                    let draw: f64 = rng.random();
                    if draw < logistic(u) {
                        1.0
                    } else {
                        0.0
                    }
                }),
            )
        }
        link => {
            let noise = standard_noise(seed, n);
            DVector::from_iterator(
                n,
                index
                    .iter()
                    .zip(noise.iter())
                    .map(|(&u, &e)| link.mean_response(u) + model.noise_scale * e),
            )
        }
    };
    Ok(Dataset {
        design,
        response,
        truth: truth.clone(),
        model: *model,
        covariance: Arc::clone(covariance),
    })
}

/// Least-squares slope of `Y` on `Xᵀβ₀`: `Σᵢ Yᵢ uᵢ / Σᵢ uᵢ²` with `uᵢ = Xᵢᵀβ₀`.
/// Its population value is `E(Y Xᵀβ₀)` because `E(Xᵀβ₀)² = 1`.
pub fn estimate_c0(dataset: &Dataset) -> f64 {
    let index = dataset.index();
    dataset.y().dot(&index) / index.norm_squared()
}

/// `n⁻¹ Σᵢ (Yᵢ − ĉ₀ Xᵢᵀβ₀)²` with `ĉ₀` from [`estimate_c0`].
pub fn estimate_xi2(dataset: &Dataset) -> f64 {
    let c0 = estimate_c0(dataset);
    let index = dataset.index();
    dataset
        .y()
        .iter()
        .zip(index.iter())
        .map(|(y, u)| (y - c0 * u).powi(2))
        .sum::<f64>()
        / dataset.n() as f64
}
