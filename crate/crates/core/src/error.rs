use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected n={expected_n}, L={expected_l}; found n={found_n}, L={found_l}")]
    GridMismatch {
        expected_n: usize,
        expected_l: f64,
        found_n: usize,
        found_l: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dilation by {scale} pushes mass {lost:.3e} outside the box")]
    SupportOverflow { scale: f64, lost: f64 },

    #[error("polynomials are linearly dependent (zero Wronskian)")]
    DependentPolynomials,

    #[error("polynomials are not coprime (gcd has degree {0})")]
    NotCoprime(usize),

    #[error("invalid polynomial pair: {0}")]
    InvalidPair(String),

    #[error("vorticity {m} outside [{lower}, {upper}]")]
    VorticityBounds { m: usize, lower: usize, upper: usize },

    #[error("shooting bisection could not bracket the ground state: {0}")]
    Bracketing(String),

    #[error("unstable coupling: {0}")]
    UnstableCoupling(String),

    #[error("unsupported trap: {0}")]
    UnsupportedTrap(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
