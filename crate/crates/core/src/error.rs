//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// Polynomial root finding or partial-fraction validation failed,
    /// typically because the model/discount pair is numerically degenerate.
    #[error("root finding failed: {0}")]
    RootFinding(String),
    /// An iterative scheme (bisection bracket, quadrature refinement,
    /// Picard iteration) exhausted its iteration budget.
    #[error("no convergence: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
