use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("invalid argument `{name}`: {message}")]
    Domain { name: &'static str, message: String },

    #[error("quadrature did not converge on [{lo}, {hi}]: estimate {value}, error {error}")]
    Quadrature { lo: f64, hi: f64, value: f64, error: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { name, message: message.into() }
    }

    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Invalid(_) | Error::Domain { .. })
    }
}
