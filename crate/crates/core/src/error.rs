use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-contract input (non-finite entries, asymmetric
    /// matrix where a symmetric one is required, ...).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("numerical failure: {0}")]
    Numeric(String),

    /// A generalized-inverse argument does not satisfy the Penrose
    /// properties the operation relies on.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported strategy: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dims(
        op: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    ) -> Self {
        Error::Dimension {
            op,
            expected: format!("{}x{}", expected.0, expected.1),
            got: format!("{}x{}", got.0, got.1),
        }
    }

    /// True for errors caused by the caller's data rather than by a numerical
    /// breakdown or the environment.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_)
                | Error::Dimension { .. }
                | Error::Precondition(_)
                | Error::Unsupported(_)
                | Error::Parse { .. }
        )
    }
}
