//! Crate-wide error type.

use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("gcd(m, h) must be 1, got m = {m}, h = {h}")]
    NotCoprime { m: i64, h: i64 },
    #[error("m and h must be positive, got m = {m}, h = {h}")]
    NonPositiveSlope { m: i64, h: i64 },
    #[error("coweight is not dominant: {0}")]
    NotDominant(String),
    #[error("coweight has a negative entry: {0}")]
    NegativeEntry(String),
    #[error("entries sum to {got}, expected {expected}")]
    SumMismatch { expected: i64, got: i64 },
    #[error("generators {a} and {b} are congruent modulo {h}")]
    CongruentGenerators { a: i64, b: i64, h: i64 },
    #[error("not a semi-module: {witness} is in A but {witness} + {m} is not")]
    NotClosed { witness: i64, m: i64 },
    #[error("type is not bounded below by nu: prefix sum {prefix} at position {index} exceeds {bound_num}/{bound_den}")]
    TypePrefixTooLarge {
        index: usize,
        prefix: i64,
        bound_num: i64,
        bound_den: i64,
    },
    #[error("reduction chain mismatch at step {step}: entry replacement gives {expected}, decomposition gives {got}")]
    ReductionMismatch {
        step: usize,
        expected: String,
        got: String,
    },
    #[error("field order {0} is too large for table construction")]
    FieldTooLarge(u64),
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("point assigns coordinates off the pair set: {0:?}")]
    PointDomainMismatch((i64, i64)),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("b sigma(M) is not contained in M (residual at index {0})")]
    BSigmaNotContained(i64),
    #[error("lattice is not in the requested stratum: {0}")]
    NotInStratum(String),
    #[error("no a' in A with a' + m - phi(a')h = {0}; invalid extended semi-module")]
    NoSourceElement(i64),
}

impl Error {
    /// True for the truncation-related failures that a caller can retry with
    /// a larger precision.
    pub fn is_precision(&self) -> bool {
        matches!(self, Error::InsufficientPrecision(_))
    }
}
