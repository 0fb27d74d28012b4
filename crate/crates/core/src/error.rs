use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("closed-form worst-case error needs integer alpha in 1..=4, got {0}")]
    UnsupportedAlpha(f64),

    #[error("bernoulli polynomial of order {0} is not available (orders 2, 4, 6, 8)")]
    UnsupportedOrder(u32),

    #[error("enumeration of {0} terms exceeds the guard of 1e9")]
    EnumerationTooLarge(f64),

    #[error("no primes in ({lo}, {hi}]")]
    EmptyPrimeSet { lo: u64, hi: u64 },

    #[error("weight rule parse error: {0}")]
    WeightSyntax(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("{0}")]
    Unsupported(String),
}
