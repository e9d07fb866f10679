use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("volume fraction {0} outside [0, 1]")]
    FractionOutOfRange(f64),

    #[error("eigenvalues must be sorted ascending")]
    UnsortedEigenvalues,

    #[error("invalid boundary datum: {0}")]
    InvalidDatum(String),

    #[error("stress bisection failed for jump {jump}: {reason}")]
    Bisection { jump: f64, reason: String },

    #[error("step {index} (t = {time}) failed: {source}")]
    Step {
        index: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("state invariant violated: {0}")]
    Invariant(String),

    #[error("inconsistent classification at t = {time}: {reason}")]
    Inconsistent { time: f64, reason: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("run at eps = {eps} failed: {source}")]
    Sweep {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from user input rather than a numerical failure.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidParams(_)
            | Error::FractionOutOfRange(_)
            | Error::UnsortedEigenvalues
            | Error::InvalidDatum(_)
            | Error::UnknownPreset(_)
            | Error::Config(_) => true,
            Error::Step { source, .. } | Error::Sweep { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
