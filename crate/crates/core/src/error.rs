use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("series did not reach the requested tolerance within {terms} terms")]
    Convergence { terms: usize },
    #[error("runaway computation: {0}")]
    Runaway(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("empty sample")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
