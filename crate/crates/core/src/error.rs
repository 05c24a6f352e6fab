use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid value for `{key}`: {message}")]
    Validation {
        key: &'static str,
        message: alloc::string::String,
    },
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("right-hand side violates the singular-operator compatibility condition (mean {mean:.3e}, rms {rms:.3e})")]
    IncompatibleRhs { mean: f64, rms: f64 },
    #[error("field `{field}` blew up at t = {time} (max |value| = {value:.3e})")]
    BlowUp { field: &'static str, time: f64, value: f64 },
    #[error("time step {dt} violates the advective limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),
    #[error("study configuration: {0}")]
    Config(alloc::string::String),
    #[error("check failed: {0}")]
    Assertion(alloc::string::String),
}

impl Error {
    pub(crate) fn validation(key: &'static str, message: impl Into<alloc::string::String>) -> Self {
        Error::Validation {
            key,
            message: message.into(),
        }
    }

    /// True for failures of the numerical run itself (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::BlowUp { .. } | Error::Cfl { .. }
        )
    }
}
