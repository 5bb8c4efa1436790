use thiserror::Error;

use crate::poly::Poly;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operands belong to different fields or dimensions")]
    SpecMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("circulant dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("unsupported dimension {d}: {reason}")]
    UnsupportedDimension { d: usize, reason: &'static str },
    #[error("operation requires characteristic 2, field has characteristic {0}")]
    UnsupportedCharacteristic(u64),
    #[error("element is not invertible; gcd with x^d - 1 is {gcd}")]
    NotInvertible { gcd: Poly },
    #[error("x^d - 1 is inseparable: gcd(d, q) != 1 for d = {d}, p = {p}")]
    InseparableModulus { d: usize, p: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("gcd({a}, {b}) != 1")]
    NotCoprime { a: u64, b: u64 },
    #[error("generator search exhausted its retry budget after {0} attempts")]
    GenerationFailed(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("message of {len} bytes exceeds block capacity of {capacity} bytes")]
    MessageTooLong { len: usize, capacity: usize },
    #[error("malformed message block: {0}")]
    MalformedMessage(&'static str),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("no discrete logarithm exists within the search bound")]
    NoSolution,
    #[error("invalid discrete-log instance: {0}")]
    InvalidInstance(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<hex::FromHexError> for Error {
    fn from(e: hex::FromHexError) -> Self {
        Error::Decode(e.to_string())
    }
}
