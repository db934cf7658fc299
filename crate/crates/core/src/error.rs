use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NonPositiveDefinite { index: usize, pivot: f64 },
    #[error("Toeplitz correlation must satisfy |rho| < 1, got {0}")]
    BadCorrelation(f64),
    #[error("covariance matrix must be square and symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("support is empty")]
    EmptySupport,
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("screening multiplier must be positive, got {0}")]
    BadThreshold(f64),
    #[error("invalid penalty level {0}")]
    BadLambda(f64),
    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("Gram matrix of the support columns is singular")]
    SingularGram,
    #[error("KKT-forced subgradient {value} at index {index} lies outside [-1, 1]")]
    InfeasibleSubgradient { index: usize, value: f64 },
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("covariance block on the support is singular")]
    SingularBlock,
    #[error("kappa must be positive, got {0}")]
    BadKappa(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
