use thiserror::Error;

/// Errors surfaced by the memory engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 2")]
    InvalidDimension(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("degenerate spectrum: Fourier coefficient {index} has magnitude {magnitude:e}")]
    DegenerateSpectrum { index: usize, magnitude: f64 },

    #[error("vector is not unitary: Fourier coefficient {index} has magnitude {magnitude}")]
    NotUnitary { index: usize, magnitude: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid time step {0}: must be at least 1")]
    InvalidTime(u64),

    #[error("invalid token {token:?}: {reason}")]
    InvalidToken { token: String, reason: &'static str },

    #[error("token {0:?} is not in the lexicon")]
    UnknownToken(String),

    #[error("duplicate slot {0:?} in chunk")]
    DuplicateSlot(String),

    #[error("chunk has no slot:value pairs")]
    EmptyChunk,

    #[error("sentence has no tokens")]
    EmptySentence,

    #[error("invalid cue: {0}")]
    InvalidCue(String),

    #[error("not enough vectors for a 2-d projection: need at least 3, got {0}")]
    InsufficientData(usize),

    #[error("power iteration did not converge within {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("incompatible snapshot: file has version {found:?}, expected {expected:?}")]
    IncompatibleSnapshot { found: String, expected: String },

    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
