use thiserror::Error;

/// Errors raised by the finite-dimensional engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty vector or zero dimension")]
    Empty,

    #[error("state vector has zero norm")]
    ZeroVector,

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not a projector (max deviation {0:e})")]
    NotProjector(f64),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid projection-valued measure: {0}")]
    InvalidPvm(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("outcome has zero probability ({0:e}); the outcome is impossible for this state")]
    ZeroProbability(f64),

    #[error("pointer dimension {got} too small, need at least {needed}")]
    InsufficientPointerDimension { needed: usize, got: usize },

    #[error("assertions are not disjoint (meet has rank {0})")]
    NotDisjoint(usize),

    #[error("samples span {rank} real dimensions, need {needed}")]
    UnderDetermined { rank: usize, needed: usize },

    #[error("operator `{0}` missing from candidate")]
    MissingOperator(String),

    #[error("value {value} for `{name}` is not in the operator's spectrum")]
    NotInSpectrum { name: String, value: f64 },

    #[error("index {index} out of range for slot {slot} with {len} alternatives")]
    IndexOutOfRange { slot: usize, index: usize, len: usize },

    #[error("history count {count} exceeds cap {cap}")]
    CapExceeded { count: usize, cap: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("conditioning on a null proposition (probability {0:e})")]
    ConditioningOnNull(f64),

    #[error("history set is not medium decoherent ({0}); no history can be realised")]
    NotDecoherent(String),

    #[error("no consistent set in the family houses the known facts")]
    EmptyFamily,

    #[error("brain states are not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
