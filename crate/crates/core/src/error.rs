use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("amplitudes are not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(&'static str),
    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("Kraus channel needs at least one operator")]
    EmptyChannel,
    #[error("value {0} is outside the allowed alphabet")]
    OutOfAlphabet(u8),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid adversary strategy: {0}")]
    InvalidStrategy(String),
    #[error("attempt budget of {budget} exhausted with {valid} of {needed} valid runs")]
    AttemptBudgetExhausted { budget: u64, valid: usize, needed: usize },
    #[error("only {available} candidate positions, {needed} needed")]
    InsufficientCandidates { available: usize, needed: usize },
    #[error("lists have different lengths ({0}, {1}, {2})")]
    LengthMismatch(usize, usize, usize),
    #[error("list correlation violated at position {0}")]
    ListInvariant(usize),
}
