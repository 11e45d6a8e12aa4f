use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid multipole index (n = {n}, m = {m}): |m| must not exceed n")]
    InvalidIndex { n: u32, m: i32 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The reflection operator is not a contraction at this truncation, or the
    /// log-determinant failed its residual check.
    #[error("log-determinant did not converge: {0}")]
    NonConvergent(String),

    #[error("quadrature not converged: relative change {rel_change:e} exceeds tolerance {tol:e}")]
    QuadratureNotConverged { rel_change: f64, tol: f64 },

    #[error("insufficient Monte Carlo statistics: relative standard error {rel_err:.3e} exceeds cap {cap:e}")]
    InsufficientStatistics { rel_err: f64, cap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
