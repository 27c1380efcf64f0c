use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("pole at {point}: {context}")]
    Pole { point: Complex64, context: String },
    #[error("divisor collision: {0}")]
    Collision(String),
    #[error("no section: divisor class differs from the bundle's by {residual}")]
    NoSection { residual: Complex64 },
    #[error("quadrature did not converge: last estimates {last} and {previous}")]
    Quadrature { last: Complex64, previous: Complex64 },
    #[error("character within {distance:e} of the trivial character")]
    TrivialCharacter { distance: f64 },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("missing splitting data for prime {0}")]
    MissingSplitting(u64),
    #[error("embedding count mismatch: expected {expected}, got {got}")]
    EmbeddingMismatch { expected: usize, got: usize },
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
