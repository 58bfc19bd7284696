use thiserror::Error;

/// Crate-wide error type.
///
/// `Domain` is a precondition violation (caller passed arguments outside the
/// documented domain). `Config` is a malformed or inconsistent specification
/// (bad JSON field, parameters that contradict each other). `Numeric` means
/// an algorithm ran but could not reach its accuracy or resource target; it
/// always carries the achieved error so callers can decide whether the
/// partial answer is usable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure in {what}: achieved {achieved:.3e}, target {target:.3e}")]
    Numeric {
        what: String,
        achieved: f64,
        target: f64,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numeric(what: impl Into<String>, achieved: f64, target: f64) -> Self {
        Error::Numeric {
            what: what.into(),
            achieved,
            target,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
