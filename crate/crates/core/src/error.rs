use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state space too large: {q}^{free} exceeds 2^{cap_log2}")]
    SizeExceeded { q: usize, free: usize, cap_log2: u32 },

    #[error("conditioning event has zero measure")]
    ZeroMeasureCondition,

    #[error("weight table has zero total mass")]
    ZeroMass,

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("graph has two short cycles sharing a node")]
    NotInFamilyG,

    #[error("unicyclic subgraph has zero Gibbs mass")]
    DegenerateH,

    #[error("boundary configuration has zero mass under the cycle subgraph")]
    InfeasibleBoundary,

    /// Internal inconsistency, e.g. a zero denominator on a feasible input.
    #[error("corrupt process state: {0}")]
    Corrupt(String),

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
