//! Error type shared by every evaluator in the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the region where the function is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// The result does not fit in an `f64`.
    #[error("overflow: {0}")]
    Overflow(String),
    /// An iterative method ran out of terms or evaluations.
    #[error("no convergence: {0}")]
    NonConvergence(String),
    /// The defining integral diverges for these parameters.
    #[error("divergent integral: {0}")]
    Divergent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
