//! Signed support recovery for sparse single-index models `Y = f(Xᵀβ₀, ε)`
//! with Gaussian designs.
//!
//! The crate bundles covariance screening, a coordinate-descent LASSO with
//! paths and cross-validation, primal-dual witness diagnostics, calculators
//! for the irrepresentability and sample-size conditions, outcome
//! transformations, and a seeded Monte-Carlo harness for phase-transition
//! curves plotted against the effective sample size `n / (s ln(p − s))`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod conditions;
pub mod design;
pub mod error;
pub mod harness;
pub mod lasso;
pub mod linalg;
pub mod models;
pub mod pdw;
pub mod rng;
pub mod screening;
pub mod support;
pub mod transforms;

pub use design::{build_covariance, sample_design, CovarianceKind, CovarianceSpec, DesignMatrix};
pub use error::{Error, Result};
pub use lasso::{LassoFit, LassoOptions, LassoPath};
pub use models::{generate, make_beta, CoefficientVector, Dataset, Link, SimModelSpec};
pub use support::{Sign, SignedSupport};
