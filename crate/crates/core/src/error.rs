use thiserror::Error;

/// Errors raised by the numerical substrate and the inference pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature for {integral} did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error bound {error_bound:e})")]
    NonConvergence {
        integral: String,
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },
    #[error("target {target} lies outside the range of the function (nearest attainable value {nearest})")]
    OutOfRange { target: f64, nearest: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{operation} is not supported for kind `{kind}`")]
    UnsupportedKind {
        operation: &'static str,
        kind: &'static str,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("density is not normalizable: {0}")]
    NotNormalizable(String),
}

impl Error {
    /// Relabel a quadrature failure with a description of the integral.
    pub fn in_integral(self, name: impl FnOnce() -> String) -> Self {
        match self {
            Error::NonConvergence {
                estimate,
                error_bound,
                subdivisions,
                ..
            } => Error::NonConvergence {
                integral: name(),
                estimate,
                error_bound,
                subdivisions,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
