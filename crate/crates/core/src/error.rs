use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate symbol {0:?} in alphabet")]
    DuplicateSymbol(char),
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(char),
    #[error("letter index {letter} is outside an alphabet of size {size}")]
    LetterOutOfRange { letter: u8, size: usize },
    #[error("the empty word cannot be forbidden")]
    EmptyForbiddenWord,
    #[error("empty period word")]
    EmptyPeriodWord,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("recoding order {order} is below the minimum {min} for this forbidden set")]
    InvalidOrder { order: usize, min: usize },
    #[error("{what} cap of {cap} exceeded")]
    CapExceeded { what: &'static str, cap: usize },
    #[error("the shift is empty")]
    EmptyShift,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph is reducible; use scc_entropy for reducible graphs")]
    Reducible,
    #[error("power iteration did not reach tolerance {tol:e} within {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        tol: f64,
        iterations: usize,
        residual: f64,
    },
    #[error("graph is not mixing")]
    NotMixing,

    #[error("query of length {len} exceeds oracle horizon {horizon}")]
    HorizonExceeded { len: usize, horizon: usize },
    #[error("oracle is not factor-closed: {word} is a member but one of its factors is not")]
    NotFactorClosed { word: String },

    #[error("word of length {len} is shorter than the window length {window}")]
    WordTooShort { len: usize, window: usize },
    #[error("block map has no entry for window {0}")]
    MissingWindow(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("slope must be a quadratic irrational")]
    RationalSlope,
    #[error("slope must lie in (1/3, 1/2)")]
    SlopeOutOfRange,
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("construction step {stage} failed: {message}")]
    Construction { stage: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
