use std::path::PathBuf;

use num_bigint::BigInt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("malformed fan: {0}")]
    MalformedFan(String),

    #[error("cone {cone:?} is not a face of any maximal cone")]
    InvalidCone { cone: Vec<usize> },

    #[error("{what} exceeds limit: {requested} > {limit}")]
    Size {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("{c} is not invertible modulo {m}")]
    NotInvertible { c: BigInt, m: u64 },

    #[error("no generic evaluation point found after {attempts} draws (seed {seed})")]
    DegenerateEvaluation { seed: u64, attempts: usize },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("no valid epsilon exists for n = {n}; counterexample to the coprimality conjecture")]
    ConjectureFailure { n: u64 },

    #[error("checkpoint {path:?} does not match this run: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
