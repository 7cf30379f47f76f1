use thiserror::Error;

/// Errors produced anywhere in the codec, the source models, the bound
/// evaluators and the experiment driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A bit read was attempted past the end of the available input.
    #[error("unexpected end of stream")]
    EndOfStream,

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The frequency total handed to the range coder exceeds its capacity.
    #[error("frequency total {total} exceeds coder capacity {capacity}")]
    PrecisionOverflow { total: u64, capacity: u64 },

    /// The compressed input is not a valid codeword.
    #[error("malformed stream: {0}")]
    MalformedStream(String),

    /// A source does not belong to the requested envelope class.
    #[error("source is not a member of the envelope class: {0}")]
    Membership(String),

    /// `finish` was called on an encoder that already terminated its stream.
    #[error("encoder already finished")]
    AlreadyFinished,

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
