use crate::fst::StateId;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown state id {0}")]
    UnknownState(StateId),
    #[error("zero-weight transitions, initial weights, and final weights are not allowed")]
    ZeroWeight,
    #[error("transducer admits an epsilon cycle; path sums are not well-defined")]
    EpsilonCycle,
    #[error("operation requires an acyclic transducer")]
    CyclicInput,
    #[error("epsilon label on a matched tape; use compose3 for machines with epsilons")]
    EpsilonInEpsFree,
    #[error("cost must be non-negative, got {0}")]
    NegativeCost(f64),
    #[error("move alphabet must not be empty")]
    EmptyAlphabet,
    #[error("forbidden factors must have length 1 or 2")]
    BadFactorLength,
    #[error("grid dimensions must each be at most 5")]
    GridTooLarge,
    #[error("illegal move symbol: {0}")]
    IllegalMove(String),
    #[error("kernel order must lie in 1..=10, got {0}")]
    InvalidKernelOrder(u32),
    #[error("machine is not an acceptor (input and output labels differ)")]
    NotAcceptor,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
