use thiserror::Error;

use crate::lane::LaneId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A lane was queried against itself; the diagonal of the conflict table holds queue state.
    #[error("illegal case: {0} queried against itself")]
    IllegalCase(LaneId),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate line: both points coincide")]
    DegenerateLine,
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("vehicle {0} has not departed")]
    NotDeparted(u64),
    #[error("fixture line {line}: {msg}")]
    Fixture { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
