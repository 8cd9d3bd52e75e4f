use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error{}: {message}", Location(*line))]
    Parse { line: Option<usize>, message: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

struct Location(Option<usize>);

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(l) => write!(f, " at line {l}"),
            None => Ok(()),
        }
    }
}

impl Error {
    pub fn parse(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    /// Process exit status: 2 usage, 3 parse/io, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Parse { .. } | Error::Io(_) => 3,
            Error::Numeric(_) => 4,
        }
    }

    /// Stable token printed on the last output line of a failing command.
    pub fn code_name(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Numeric(_) => "numeric",
        }
    }
}

impl From<rkfda_core::Error> for Error {
    fn from(e: rkfda_core::Error) -> Self {
        match e {
            rkfda_core::Error::InvalidArgument(m) => Error::Usage(m),
            other => Error::Numeric(other.to_string()),
        }
    }
}
