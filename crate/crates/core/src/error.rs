use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative mass {mass} on atom {atom}")]
    NegativeMass { atom: String, mass: String },
    #[error("atom masses sum to {total}, which exceeds one")]
    MassExceedsOne { total: String },
    #[error("letter {letter} is outside the alphabet of size {alphabet_size}")]
    MemberOutOfRange { letter: usize, alphabet_size: usize },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimitExceeded(String),
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },
    #[error("index {index} out of range (alphabet size {alphabet_size})")]
    IndexOutOfRange { index: usize, alphabet_size: usize },
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("requested depth {requested} but realization only has depth {available}")]
    DepthMismatch { requested: usize, available: usize },
    #[error("word of length {got} does not match level {expected}")]
    WordLengthMismatch { expected: usize, got: usize },
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceLimitExceeded(_) => 3,
            Error::InvariantViolation(_) => 4,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}
