use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("no table entry for preparation `{prep}`, transformation `{trans}`, measurement `{meas}`")]
    MissingEntry { prep: String, trans: String, meas: String },

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid probability data: {0}")]
    InvalidProbability(String),

    #[error("invalid quantum object: {0}")]
    InvalidQuantum(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("invalid game strategy: {0}")]
    Strategy(String),

    #[error("malformed input at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
