use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// Precondition violations that the experiments want to record as data
/// (for example a weight vector outside a formula's range) are reported
/// as [`Error::ConstraintViolation`] so callers can turn them into flags.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("denominator is divisible by p = {p}")]
    PDividesDenominator { p: u64 },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("digit {digit} out of range for p = {p}")]
    DigitOutOfRange { digit: u32, p: u64 },
    #[error("mixed primes: {0} and {1}")]
    MixedPrimes(u64, u64),
    #[error("need {needed} p-adic digits but only {available} are stored")]
    InsufficientPrecision { needed: u64, available: u64 },
    #[error("p^{t} exceeds the supported modulus range (p = {p})")]
    ModulusOverflow { p: u64, t: u64 },
    #[error("approximation value must be positive")]
    NonPositivePsi,
    #[error("threshold exponent {t} at coordinate {coordinate} is not positive")]
    ThresholdNonpositive { coordinate: usize, t: i64 },
    #[error("threshold exponent {t} at coordinate {coordinate} is negative")]
    ThresholdNegative { coordinate: usize, t: i64 },
    #[error("estimated {ops} operations exceed the budget of {budget}")]
    InfeasibleSize { ops: u128, budget: u128 },
    #[error("pigeonhole threshold not met: p^-n N^(n+1-sum tau) < 1")]
    NoOverfullBucket,
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
