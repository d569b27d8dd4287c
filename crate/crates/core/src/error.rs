use thiserror::Error;

use crate::profile::StrategyProfile;

/// Errors produced by the contest toolkit.
#[derive(Debug, Error)]
pub enum ContestError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller asked for something the operation does not support.
    #[error("usage error: {0}")]
    Usage(String),

    /// Inputs disagree in shape (e.g. profile length vs. agent count).
    #[error("structural error: {0}")]
    Structural(String),

    /// A documented precondition of a closed form does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A worst-case construction was requested outside the willingness regime where it applies.
    #[error("regime error: {0}")]
    Regime(String),

    /// Best-response dynamics ran out of sweeps.
    #[error("best-response dynamics did not converge after {sweeps} sweeps (max KKT residual {max_residual:e})")]
    NonConvergence {
        sweeps: usize,
        max_residual: f64,
        last_profile: Box<StrategyProfile>,
        residuals: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, ContestError>;
