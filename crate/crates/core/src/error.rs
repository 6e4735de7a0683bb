use thiserror::Error;

use crate::index_maps::Index;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} is not in the domain of the map")]
    Domain { index: Index },

    #[error("integer representation exceeded {bits} bits while evaluating the map")]
    Overflow { bits: u64 },

    #[error("invalid map presentation: {0}")]
    InvalidMap(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("undecided within budget: {0}")]
    Undecided(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
