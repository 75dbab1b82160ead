use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the range where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The parameters are valid but the requested regime is not supported.
    #[error("unsupported regime: {0}")]
    Unsupported(String),

    /// The problem is too large for the dense oracle.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Two inputs that must agree in shape do not.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Bad grid file, unknown lemma identifier and similar caller mistakes.
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Same variant, message prefixed with `context`.
    pub fn at(self, context: impl std::fmt::Display) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("{context}: {m}")),
            Error::Unsupported(m) => Error::Unsupported(format!("{context}: {m}")),
            Error::Resource(m) => Error::Resource(format!("{context}: {m}")),
            Error::Contract(m) => Error::Contract(format!("{context}: {m}")),
            Error::Usage(m) => Error::Usage(format!("{context}: {m}")),
        }
    }
}

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
pub(crate) use domain;
