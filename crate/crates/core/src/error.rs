use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("resource cap exceeded: {0}")]
    Cap(String),
    #[error("input is not normal: {0}")]
    NotNormal(String),
    #[error("defective spectrum: {0}")]
    Defective(String),
    #[error("ambiguous decision near threshold: {what} (margin {margin:e})")]
    Ambiguous { what: String, margin: f64 },
    #[error("symmetry not satisfied: {0}")]
    Symmetry(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Machine-readable error category, stable across releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Cap,
    Analysis,
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension_mismatch",
            Error::Invalid(_) => "invalid_input",
            Error::Parse(_) => "malformed_input",
            Error::Cap(_) => "cap_exceeded",
            Error::NotNormal(_) => "not_normal",
            Error::Defective(_) => "defective_spectrum",
            Error::Ambiguous { .. } => "ambiguous",
            Error::Symmetry(_) => "symmetry_violated",
            Error::Numerical(_) => "numerical_failure",
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Dimension(_) | Error::Invalid(_) | Error::Parse(_) => ErrorKind::Input,
            Error::Cap(_) => ErrorKind::Cap,
            _ => ErrorKind::Analysis,
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::Input => "input",
            ErrorKind::Cap => "cap",
            ErrorKind::Analysis => "analysis",
        };
        f.write_str(s)
    }
}

pub(crate) fn dim(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

pub(crate) fn cap(msg: impl Into<String>) -> Error {
    Error::Cap(msg.into())
}
