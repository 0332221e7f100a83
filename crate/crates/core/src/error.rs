use thiserror::Error;

/// Errors produced by the reconstruction toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A record could not be decoded. `offset` is a byte offset for binary
    /// input and a 1-based line number for text input.
    #[error("parse error at {location} {offset}: {message}")]
    Parse {
        location: &'static str,
        offset: u64,
        message: String,
    },

    /// Decoded data violates a domain invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A caller-supplied argument is out of range or inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("window detection found {found} peaks, expected at least {expected}")]
    Detection { found: usize, expected: usize },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("statistics undefined: {0}")]
    UndefinedRate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn parse_line(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            location: "line",
            offset: line as u64,
            message: message.into(),
        }
    }

    pub(crate) fn parse_byte(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            location: "byte",
            offset: offset as u64,
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation(_)
                | Error::Argument(_)
                | Error::Io(_)
                | Error::Image(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
