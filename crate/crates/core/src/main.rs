use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use simsupport::conditions::check_conditions;
use simsupport::harness::{emit_csv, run_experiment, ExperimentConfig, PhasePoint};
use simsupport::lasso::{cross_validate, lambda_grid, path, LassoOptions, Problem};
use simsupport::pdw::pdw_check;
use simsupport::screening::{covariance_screen, default_nu, estimate_sigma, ScreeningResult};
use simsupport::transforms::TransformSpec;
use simsupport::{generate, CovarianceSpec, Dataset, Link, Result, SimModelSpec};

/// Sparse support recovery in single index models.
#[derive(Parser)]
#[command(name = "simsupport", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Synthetic data: `n` draws from `N(0, Σ)` with `s` active coefficients.
#[derive(Args)]
struct DataArgs {
    #[arg(long, default_value_t = 100)]
    p: usize,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    s: usize,
    /// Toeplitz correlation; identity covariance when omitted.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value = "sin_linear")]
    link: Link,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Outcome transform: none, cdf or cdf-centered.
    #[arg(long, default_value = "none")]
    transform: String,
}

impl DataArgs {
    fn covariance(&self) -> Result<CovarianceSpec> {
        match self.rho {
            Some(rho) => CovarianceSpec::toeplitz(self.p, rho),
            None => CovarianceSpec::identity(self.p),
        }
    }

    fn dataset(&self) -> Result<Dataset> {
        let cov = Arc::new(self.covariance()?);
        let beta = simsupport::models::leading_beta(&cov, self.s)?;
        let model = SimModelSpec { link: self.link, noise_scale: self.noise };
        let d = generate(&cov, &beta, &model, self.n, self.seed)?;
        Ok(d.transformed(&TransformSpec::from_flag(&self.transform)?))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Covariance screening; prints JSON.
    Screen {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, conflicts_with = "auto_nu", required_unless_present = "auto_nu")]
        nu: Option<f64>,
        #[arg(long)]
        auto_nu: bool,
    },
    /// LASSO path; prints CSV `lambda,nnz,kkt_residual,support_hash`.
    LassoPath {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long, default_value_t = 1e-3)]
        lmin_ratio: f64,
    },
    /// K-fold cross-validation over a path grid; prints JSON.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long, default_value_t = 1e-3)]
        lmin_ratio: f64,
    },
    /// Primal-dual witness construction; prints JSON.
    PdwCheck {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated indices; defaults to the true support.
        #[arg(long, value_delimiter = ',')]
        support: Vec<usize>,
        #[arg(long)]
        lambda: f64,
        /// Defaults to the population constant of the link.
        #[arg(long)]
        c0: Option<f64>,
    },
    /// Population condition quantities for a support; prints JSON.
    Conditions {
        #[arg(long)]
        p: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        support: Vec<usize>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Monte-Carlo phase transition; writes CSV.
    PhaseTransition {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
}

#[derive(Serialize)]
struct ScreenOutput {
    nu: f64,
    #[serde(flatten)]
    result: ScreeningResult,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Screen { data, nu, auto_nu } => {
            let d = data.dataset()?;
            let nu = match (nu, auto_nu) {
                (Some(nu), _) => nu,
                _ => default_nu(data.s, estimate_sigma(d.y())),
            };
            print_json(&ScreenOutput { nu, result: covariance_screen(&d, nu)? })
        }
        Command::LassoPath { data, grid, lmin_ratio } => {
            let d = data.dataset()?;
            let pth = path(&d, grid, lmin_ratio, &LassoOptions::default())?;
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(["lambda", "nnz", "kkt_residual", "support_hash"])?;
            for f in &pth.fits {
                w.write_record([
                    f.lambda.to_string(),
                    f.nnz().to_string(),
                    f.kkt_residual.to_string(),
                    format!("{:016x}", f.signed_support().digest()),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Cv { data, k, grid, lmin_ratio } => {
            let d = data.dataset()?;
            let opts = LassoOptions::default();
            let problem = Problem::from_dataset(&d, opts.center)?;
            let grid = lambda_grid(problem.lambda_max(), grid, lmin_ratio)?;
            print_json(&cross_validate(&d, &grid, k, data.seed, &opts)?)
        }
        Command::PdwCheck { data, support, lambda, c0 } => {
            let d = data.dataset()?;
            let support = if support.is_empty() { d.truth.support().indices() } else { support };
            let c0 = c0.unwrap_or_else(|| data.link.population_c0());
            print_json(&pdw_check(&d, &support, lambda, c0)?)
        }
        Command::Conditions { p, support, rho, n } => {
            let cov = match rho {
                Some(rho) => CovarianceSpec::toeplitz(p, rho)?,
                None => CovarianceSpec::identity(p)?,
            };
            print_json(&check_conditions(&cov, &support, n)?)
        }
        Command::PhaseTransition { config, out, threads } => {
            let config = ExperimentConfig::from_json(&std::fs::read_to_string(config)?)?;
            let progress = |p: usize, pt: &PhasePoint| {
                eprintln!(
                    "p = {p}, n_eff = {}, n = {}: success {:.3} ({} errors)",
                    pt.n_eff, pt.n, pt.success_fraction, pt.errors
                );
            };
            let curves = run_experiment(&config, threads, Some(&progress))?;
            emit_csv(&curves, &out)
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
