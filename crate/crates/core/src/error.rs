//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by solvers, validators, and the Monte Carlo engine.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid model, contract, or solver input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Root-finding bracket does not straddle a sign change.
    #[error("no sign change on bracket [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// Iteration or subdivision budget exhausted before convergence.
    #[error("{what}: not converged after {iterations} iterations (best residual {residual:e})")]
    MaxIterExceeded {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A nonlinear solve failed to reach its residual tolerance.
    #[error("convergence failure in {what}: residual {residual:e} after {iterations} iterations")]
    Convergence {
        what: &'static str,
        residual: f64,
        iterations: usize,
    },

    /// Outer bracket expansion for the corner-slope minimization gave up.
    #[error("no interior minimum for the corner slope after {expansions} bracket expansions (last bracket [{lo}, {hi}])")]
    OuterBracketFailure { lo: f64, hi: f64, expansions: usize },

    /// The requested output is undefined for the contract's regime.
    #[error("regime unsupported: {0}")]
    RegimeUnsupported(String),

    /// The operation does not apply to this contract family.
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    /// Monte Carlo configuration is inconsistent with the model.
    #[error("config error: {0}")]
    ConfigError(String),

    /// A Monte Carlo estimate is statistically indistinguishable from zero.
    #[error("statistical failure: {0}")]
    StatisticalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad inputs rather than numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Domain(_)
                | Error::RegimeUnsupported(_)
                | Error::UnsupportedFamily(_)
                | Error::ConfigError(_)
        )
    }
}
