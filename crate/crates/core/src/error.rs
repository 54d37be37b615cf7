use thiserror::Error;

/// Errors produced by the pricing library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("covariance matrix is not positive definite: {0}")]
    MatrixNotPd(String),

    #[error("infinite jump integral: {0}")]
    InfiniteIntegral(String),

    #[error("characteristic function overflow at t = {t}: Re(-tΨ) = {log_modulus}")]
    Overflow { t: f64, log_modulus: f64 },

    #[error("contour abscissa {abscissa} in dimension {dim} lies outside the strip ({lo}, {hi})")]
    StripViolation {
        dim: usize,
        abscissa: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unsupported dimension n = {n}: tensor-product inversion supports 1 <= n <= {max}")]
    UnsupportedDimension { n: usize, max: usize },

    #[error("integrand shows no decay along dimension {dim} up to half-width {limit}")]
    NonDecaying { dim: usize, limit: f64 },

    #[error("quadrature grid of {points} points exceeds the budget of {budget}")]
    GridBudget { points: u64, budget: u64 },

    #[error(
        "boundary solver did not converge at tau = {tau}: last iterate {last}, residual {residual}"
    )]
    NonConvergence { tau: f64, last: f64, residual: f64 },

    #[error("unsupported exercise style: {0}")]
    UnsupportedStyle(String),

    #[error("grid too coarse: spacing {h} exceeds S/10 = {limit}")]
    GridTooCoarse { h: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be finite, got {v}"
        )))
    }
}
