use thiserror::Error;

/// Errors produced by pulse construction, propagation and the sweep engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation not supported for the {0} shape")]
    UnsupportedShape(&'static str),

    #[error("degenerate sampling: {0}")]
    DegenerateSampling(String),

    #[error("resource limit exceeded: {what} needs {requested}, limit is {limit}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("no root in bracket: residuals {lo_residual:e} (low end) and {hi_residual:e} (high end)")]
    NoRoot { lo_residual: f64, hi_residual: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("grid point {index}: {source}")]
    AtGridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {value}")))
    }
}
