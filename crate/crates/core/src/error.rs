use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a unit modulo {1}")]
    NotAUnit(String, String),
    #[error("valuation of zero is undefined")]
    ZeroInput,
    #[error("denominator {0} is not a unit at p = {1}")]
    DenominatorNotUnit(String, u64),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("signature mismatch between factors")]
    SignatureMismatch,
    #[error("coordinate {0} out of range")]
    BadCoordinate(usize),
    #[error("equation has zero right-hand coefficient")]
    ZeroRhs,
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("formula is not conjunctive: {0}")]
    NotConjunctive(String),
    #[error("malformed atom code: {0}")]
    MalformedCode(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("fuel exhausted after {0} levels")]
    FuelExhausted(usize),
    #[error("matrix contains a disjunction")]
    DisjunctionPresent,
    #[error("search space too large: {0}")]
    TooLarge(String),
    #[error("stub diverged: {0}")]
    StubDiverged(String),
    #[error("type error: {0}")]
    Type(String),
}

pub type Result<T> = std::result::Result<T, Error>;
