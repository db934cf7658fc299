//! Monte-Carlo phase-transition experiments: the probability of exact signed
//! support recovery as a function of the effective sample size
//! `n / (s ln(p − s))`.

use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::conditions::{check_conditions, sample_size_for, theoretical_lambda};
use crate::design::{build_covariance, CovarianceKind, CovarianceSpec};
use crate::error::{Error, Result};
use crate::lasso::{
    cross_validate, fit, fit_problem, lambda_grid, path_contains_true_support, path_on, LassoOptions, Problem,
};
use crate::models::{estimate_xi2, generate, leading_beta, CoefficientVector, Dataset, SimModelSpec};
use crate::rng::mix_seed;
use crate::screening::{covariance_screen, default_nu, estimate_sigma};
use crate::support::SignedSupport;
use crate::transforms::TransformSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SparsityRule {
    /// `s = round(√p)`
    SqrtP,
    Fixed { s: usize },
}

impl SparsityRule {
    pub fn sparsity(&self, p: usize) -> usize {
        match *self {
            SparsityRule::SqrtP => ((p as f64).sqrt().round() as usize).max(1),
            SparsityRule::Fixed { s } => s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceChoice {
    Identity,
    Toeplitz { rho: f64 },
}

impl CovarianceChoice {
    pub fn build(&self, p: usize) -> Result<CovarianceSpec> {
        match *self {
            CovarianceChoice::Identity => build_covariance(CovarianceKind::Identity, p),
            CovarianceChoice::Toeplitz { rho } => build_covariance(CovarianceKind::Toeplitz { rho }, p),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Covariance screening with `ν = 1/√s + 2√2 σ̂`.
    ScreeningAuto,
    ScreeningNu { nu: f64 },
    /// Success if some point of the LASSO path has the target signed support.
    #[default]
    LassoPathContains,
    /// A single LASSO fit at `λ_T` computed from population quantities and
    /// the empirical `ξ²`.
    LassoAtLambdaT { c_t: f64 },
    /// A single LASSO fit at the cross-validated λ.
    LassoCv { k: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathSettings {
    pub grid_size: usize,
    pub lambda_min_ratio: f64,
    /// Stop a path once it has more than `max_nnz_factor · s` nonzeros.
    pub max_nnz_factor: usize,
}

impl Default for PathSettings {
    fn default() -> Self {
        Self { grid_size: 200, lambda_min_ratio: 1e-3, max_nnz_factor: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p_values: Vec<usize>,
    pub s_rule: SparsityRule,
    pub covariance: CovarianceChoice,
    #[serde(deserialize_with = "model_field")]
    pub model: SimModelSpec,
    pub n_eff_grid: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub transform: TransformSpec,
    #[serde(default)]
    pub path: PathSettings,
}

fn default_replicates() -> usize {
    200
}

/// Accepts either a bare link name or a full model object.
fn model_field<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<SimModelSpec, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Field {
        Link(crate::models::Link),
        Spec(SimModelSpec),
    }
    Ok(match Field::deserialize(de)? {
        Field::Link(link) => SimModelSpec::new(link),
        Field::Spec(spec) => spec,
    })
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.p_values.is_empty() || self.n_eff_grid.is_empty() {
            return Err(Error::InvalidConfig("p_values and n_eff_grid must be non-empty".into()));
        }
        if self.n_eff_grid[0] <= 0.0 || self.n_eff_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("n_eff_grid must be positive and strictly ascending".into()));
        }
        for &p in &self.p_values {
            let s = self.s_rule.sparsity(p);
            if s == 0 || p < s + 2 {
                return Err(Error::InvalidConfig(format!("p = {p} with s = {s} leaves p - s < 2")));
            }
        }
        match self.method {
            Method::ScreeningNu { nu } if !(nu > 0.0) => return Err(Error::BadThreshold(nu)),
            Method::LassoAtLambdaT { c_t } if !(c_t > 1.0) => {
                return Err(Error::InvalidConfig(format!("C_T must exceed 1, got {c_t}")))
            }
            Method::LassoCv { k } if k < 2 => return Err(Error::InvalidConfig(format!("need k >= 2, got {k}"))),
            _ => {}
        }
        if self.path.grid_size < 2 || !(self.path.lambda_min_ratio > 0.0 && self.path.lambda_min_ratio < 1.0) {
            return Err(Error::InvalidConfig("invalid path settings".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    pub n_eff: f64,
    pub n: usize,
    pub success_fraction: f64,
    pub replicates: usize,
    /// Replicates that ended in an error and were counted as failures.
    pub errors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseCurve {
    pub p: usize,
    pub s: usize,
    pub points: Vec<PhasePoint>,
}

/// Exact signed-support equality.
pub fn success_metric(estimated: &SignedSupport, truth: &SignedSupport) -> bool {
    estimated == truth
}

/// Population quantities shared by all replicates of one `p`.
#[derive(Clone, Debug)]
pub struct Setting {
    pub covariance: Arc<CovarianceSpec>,
    pub beta: CoefficientVector,
    pub d_max_cond: f64,
    pub kappa: f64,
}

impl Setting {
    pub fn new(choice: &CovarianceChoice, p: usize, s: usize) -> Result<Self> {
        let covariance = Arc::new(choice.build(p)?);
        let beta = leading_beta(&covariance, s)?;
        let report = check_conditions(&covariance, &beta.support().indices(), None)?;
        Ok(Self { covariance, beta, d_max_cond: report.d_max_cond, kappa: report.kappa })
    }
}

/// Runs one recovery method on `dataset` and reports whether it returned the
/// target signed support.
pub fn evaluate_method(
    method: &Method,
    dataset: &Dataset,
    setting: &Setting,
    path: &PathSettings,
    seed: u64,
) -> Result<bool> {
    let target = dataset.recovery_target();
    let s = dataset.truth.sparsity();
    let opts = LassoOptions::default();
    match *method {
        Method::ScreeningAuto => {
            let nu = default_nu(s, estimate_sigma(dataset.y()));
            Ok(success_metric(&covariance_screen(dataset, nu)?.selected, &target))
        }
        Method::ScreeningNu { nu } => Ok(success_metric(&covariance_screen(dataset, nu)?.selected, &target)),
        Method::LassoPathContains => {
            let problem = Problem::from_dataset(dataset, opts.center)?;
            if problem.lambda_max() <= 0.0 {
                return Ok(target.is_empty());
            }
            let grid = lambda_grid(problem.lambda_max(), path.grid_size, path.lambda_min_ratio)?;
            let fits = path_on(&problem, &grid, &opts, Some(path.max_nnz_factor * s))?;
            Ok(path_contains_true_support(&fits, &target).is_some_and(|f| f.converged))
        }
        Method::LassoAtLambdaT { c_t } => {
            let lambda = theoretical_lambda(
                estimate_xi2(dataset),
                c_t,
                setting.d_max_cond,
                setting.kappa,
                dataset.n(),
                dataset.p(),
                s,
            )?;
            let f = fit(dataset, lambda, &opts)?;
            Ok(f.converged && success_metric(&f.signed_support(), &target))
        }
        Method::LassoCv { k } => {
            let problem = Problem::from_dataset(dataset, opts.center)?;
            if problem.lambda_max() <= 0.0 {
                return Ok(target.is_empty());
            }
            let grid = lambda_grid(problem.lambda_max(), path.grid_size, path.lambda_min_ratio)?;
            let cv = cross_validate(dataset, &grid, k, seed, &opts)?;
            let f = fit_problem(&problem, cv.best_lambda, None, &opts)?;
            Ok(f.converged && success_metric(&f.signed_support(), &target))
        }
    }
}

/// Progress notification after each `(p, n_eff)` point.
pub type Progress<'a> = &'a (dyn Fn(usize, &PhasePoint) + Sync);

/// Runs every `(p, n_eff, replicate)` cell on a pool of `threads` workers.
/// The result depends only on `config`.
pub fn run_experiment(config: &ExperimentConfig, threads: usize, progress: Option<Progress>) -> Result<Vec<PhaseCurve>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| {
        let mut p_values = config.p_values.clone();
        p_values.sort_unstable();
        p_values.dedup();
        p_values
            .iter()
            .map(|&p| {
                let s = config.s_rule.sparsity(p);
                let setting = Setting::new(&config.covariance, p, s)?;
                let points = config
                    .n_eff_grid
                    .iter()
                    .enumerate()
                    .map(|(k, &n_eff)| {
                        let point = run_point(config, &setting, p, s, k, n_eff)?;
                        if let Some(report) = progress {
                            report(p, &point);
                        }
                        Ok(point)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(PhaseCurve { p, s, points })
            })
            .collect()
    })
}

fn run_point(config: &ExperimentConfig, setting: &Setting, p: usize, s: usize, k: usize, n_eff: f64) -> Result<PhasePoint> {
    let n = sample_size_for(n_eff, p, s)?;
    let errors = AtomicUsize::new(0);
    let successes: usize = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = mix_seed(&[config.master_seed, p as u64, k as u64, r as u64]);
            let outcome = generate(&setting.covariance, &setting.beta, &config.model, n, seed)
                .map(|d| d.transformed(&config.transform))
                .and_then(|d| evaluate_method(&config.method, &d, setting, &config.path, seed));
            match outcome {
                Ok(hit) => usize::from(hit),
                Err(e) => {
                    log::warn!("p = {p}, n = {n}, replicate {r}: {e}");
                    errors.fetch_add(1, Ordering::Relaxed);
                    0
                }
            }
        })
        .sum();
    Ok(PhasePoint {
        n_eff,
        n,
        success_fraction: successes as f64 / config.replicates as f64,
        replicates: config.replicates,
        errors: errors.into_inner(),
    })
}

/// Writes `p,s,n_eff,n,replicates,success_fraction` rows ordered by `p`,
/// then `n_eff`.
pub fn write_csv<W: Write>(curves: &[PhaseCurve], out: W) -> Result<()> {
    let mut rows: Vec<(usize, usize, &PhasePoint)> =
        curves.iter().flat_map(|c| c.points.iter().map(move |pt| (c.p, c.s, pt))).collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.n_eff.total_cmp(&b.2.n_eff)));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "s", "n_eff", "n", "replicates", "success_fraction"])?;
    for (p, s, pt) in rows {
        w.write_record([
            p.to_string(),
            s.to_string(),
            pt.n_eff.to_string(),
            pt.n.to_string(),
            pt.replicates.to_string(),
            pt.success_fraction.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(curves: &[PhaseCurve], path: &Path) -> Result<()> {
    write_csv(curves, std::fs::File::create(path)?)
}
