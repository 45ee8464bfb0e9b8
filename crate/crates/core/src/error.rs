use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("score {0} is outside 1..=10")]
    ScoreOutOfRange(i64),

    #[error("bad scheme `{text}`: {reason}")]
    Scheme { text: String, reason: String },

    #[error("category `{0}` has no records")]
    EmptyCategory(String),

    #[error("curve is not strictly increasing at v={v}; use a larger sample")]
    NonMonotoneCurve { v: usize },

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid_input",
            Error::ScoreOutOfRange(_) => "score_out_of_range",
            Error::Scheme { .. } => "bad_scheme",
            Error::EmptyCategory(_) => "empty_category",
            Error::NonMonotoneCurve { .. } => "non_monotone_curve",
            Error::Row { .. } => "bad_row",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
