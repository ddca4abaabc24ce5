use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level must be a positive integer, got 0")]
    ZeroLevel,

    #[error("level {0} has no prime divisors")]
    NoPrimeDivisors(u64),

    #[error("level {0} is not coprime to 6")]
    NotCoprimeTo6(u64),

    #[error("level {0} is not squarefree")]
    NotSquarefree(u64),

    #[error("h_N is undefined for level {0} (even level)")]
    HUndefined(u64),

    #[error("{d} does not divide {n}")]
    NotADivisor { d: u64, n: u64 },

    #[error("exponent keys do not match the divisors of {0}")]
    ExponentKeys(u64),

    #[error("weight must be an even integer >= 2, got {0}")]
    BadWeight(i64),

    #[error("half-integral weight is not supported here")]
    HalfIntegralWeight,

    #[error("level {0} needs at least two distinct prime divisors")]
    TooFewPrimes(u64),

    #[error("level {0} is not in S")]
    NotInS(u64),

    #[error("mode {0} is not valid for this operation")]
    BadMode(&'static str),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal consistency alarm: {0}")]
    TheoremViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),
}

impl Error {
    /// Whether this error indicates a broken invariant rather than bad input.
    pub fn is_alarm(&self) -> bool {
        matches!(self, Error::TheoremViolation(_))
    }
}
