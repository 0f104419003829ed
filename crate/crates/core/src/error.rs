use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "tail-mass inversion failed for xi = {xi}: could not bracket root in [{lo:e}, {hi:e}]"
    )]
    Bracket { xi: f64, lo: f64, hi: f64 },

    #[error("total mass moment of order {0} is not available (order cap is 10 and the tilted intensity must be finite)")]
    MomentUnavailable(usize),

    #[error("observation {index} has zero likelihood under every atom of the current measure")]
    ZeroLikelihood { index: usize },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("chain {chain} failed: {source}")]
    Chain {
        chain: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True when the error comes from bad input rather than from sampling.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidParameter(_) | Error::Data(_) | Error::Parse { .. } | Error::Csv(_) => {
                true
            }
            Error::Chain { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
