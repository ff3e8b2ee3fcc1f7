use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed trial summary: {0}")]
    Malformed(String),

    #[error("negative count in cell {cell}: {value}")]
    NegativeCount { cell: String, value: i64 },

    #[error("treatment arm w={arm} has no observations")]
    EmptyTreatmentArm { arm: u8 },

    #[error("{field} = {value} is outside [0, 1]")]
    OutOfRange { field: &'static str, value: f64 },

    #[error("treatment marginal P(W=0) = {0} must lie strictly inside (0, 1)")]
    DegenerateTreatmentMarginal(f64),

    #[error("invalid trivariate table: {0}")]
    InvalidTable(String),

    #[error("lambda = {lambda} is outside the feasible interval [{lo}, {hi}]")]
    LambdaOutOfRange { lambda: f64, lo: f64, hi: f64 },

    #[error("conditioning event has probability zero: {0}")]
    ConditioningEventNull(&'static str),

    #[error("the Y-marginal has no degenerate conditional")]
    NotDegenerate,

    #[error("marginals are incompatible: {}", violated.join("; "))]
    Incompatible { violated: Vec<String> },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("free dimension {dimension} exceeds the oracle cap {cap}")]
    DimensionTooHigh { dimension: usize, cap: usize },

    #[error("hypothesized information {0} bits must be finite and nonnegative")]
    NegativeInformation(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
