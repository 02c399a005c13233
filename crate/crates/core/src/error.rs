use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),
    #[error("{x} is not invertible modulo {n}")]
    NotInvertible { x: u64, n: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("gate parameter is undefined for g = 1")]
    GateUndefined,
    #[error("gcd({p}, {b}) != 1")]
    NotCoprime { p: u64, b: u64 },
    #[error("modulus {p} must exceed {bound}")]
    TooSmall { p: u64, bound: u64 },
    #[error("{base}^{exp} does not fit in 64 bits")]
    Overflow { base: u64, exp: u32 },
    #[error("{a} is not a unit modulo {m}")]
    NotUnit { a: u64, m: u64 },
    #[error("{n} is not a good slice modulo {m}")]
    NotGoodSlice { n: u64, m: u64 },
    #[error("invalid digit system: {0}")]
    InvalidSystem(String),
    #[error("invalid scan configuration: {0}")]
    ConfigInvalid(String),
}
