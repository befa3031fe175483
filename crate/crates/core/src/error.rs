use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Rows and objective of a linear program disagree in width.
    #[error("dimension mismatch: expected {expected} coefficients, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The ambiguity set admits no distribution (or no hindsight price is feasible).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The linear program has no finite optimum.
    #[error("unbounded: {0}")]
    Unbounded(String),

    /// The simplex stalled or produced a solution that fails verification.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// A bracketing root search was given an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {flo}, f(hi) = {fhi}")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
