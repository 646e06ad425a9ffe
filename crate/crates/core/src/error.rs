//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("not enough primes: need {count} of {bits} bits congruent to 1 mod {modulus}")]
    NotEnoughPrimes { count: usize, bits: u32, modulus: u64 },

    #[error("wrong polynomial representation: expected {expected}, got {got}")]
    WrongRepresentation { expected: &'static str, got: &'static str },

    #[error("RNS basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("ciphertext level/scale mismatch: {0}")]
    LevelMismatch(String),

    #[error("missing evaluation key: {0}")]
    MissingKey(String),

    #[error("out of levels: {0}")]
    OutOfLevels(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("cycle detected in block graph involving node {0}")]
    CycleDetected(u64),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("serialization error: {0}")]
    Serialize(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
