use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("exponent d must be at least 2, got {0}")]
    InvalidExponent(u32),

    #[error("modulus must be at least 1")]
    InvalidModulus,

    #[error("index must be at least {min}, got {got}")]
    InvalidIndex { min: u64, got: u64 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{0} must be an odd prime")]
    NotOddPrime(u64),

    #[error("valuation of 0 is infinite")]
    ZeroValuation,

    #[error("orbit term W_{index} would exceed the digit cap of {cap} decimal digits")]
    DigitCapExceeded { index: u64, cap: u64 },

    #[error("modulus {base}^{exp} does not fit in 64 bits")]
    ModulusOverflow { base: u64, exp: u32 },

    #[error("x -> x^{d} is not a permutation of Z/{p}Z (gcd(d, p-1) = {gcd})")]
    NotPermutation { p: u64, d: u64, gcd: u64 },

    #[error("{a} is not a unit modulo {m}")]
    NotUnit { a: u64, m: u64 },

    #[error("exponent {0} must be odd")]
    EvenExponent(i64),

    #[error("{what} = {value} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: u64,
        cap: u64,
    },

    #[error("unsupported export format `{0}`")]
    UnsupportedFormat(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
