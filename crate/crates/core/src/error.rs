use alloc::boxed::Box;
use alloc::string::String;

use crate::driver::ConvergenceTrace;

pub type Result<T, E = CdlError> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CdlError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("linear solver failure: {0}")]
    Solver(String),
    /// Non-finite objective during learning; carries the rows recorded so far.
    #[error("objective became non-finite at iteration {iteration}")]
    Diverged {
        iteration: usize,
        trace: Box<ConvergenceTrace>,
    },
}

impl CdlError {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        CdlError::Dimension(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        CdlError::Parameter(msg.into())
    }
}
