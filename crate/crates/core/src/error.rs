use thiserror::Error;

use crate::nnet::Network;

/// Errors raised across the crate.
///
/// The command-line front end maps each variant onto an exit code, see
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parameter out of domain: {0}")]
    Parameter(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    #[error("invalid input: {0}")]
    InputFormat(String),

    #[error("activation `{0}` has no gradient")]
    UnsupportedGradient(&'static str),

    #[error("non-finite value at iteration {iteration}")]
    Divergence {
        iteration: usize,
        /// Parameters from the last finite evaluation, when the caller tracked them.
        last_good: Option<Box<Network>>,
    },

    #[error("variational fit diverged at step {iteration}")]
    ElboDivergence {
        iteration: usize,
        /// ELBO estimates up to the failing step.
        trace: Vec<f64>,
    },

    #[error("model error: {0}")]
    Model(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("column `{0}` has the wrong type")]
    ColumnType(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for this error: 1 usage, 2 data or config, 3 numerical divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Divergence { .. } | Error::ElboDivergence { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            kind => Error::Parse {
                line,
                message: format!("{kind:?}"),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
