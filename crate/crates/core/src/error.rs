use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed rational literal `{0}`")]
    MalformedLiteral(String),
    #[error("zero denominator in literal `{0}`")]
    ZeroDenominator(String),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("mismatched primes: {0} and {1}")]
    PrimeMismatch(u64, u64),
    #[error("zero is not an automorphism of the p-adic numbers")]
    ZeroAutomorphism,
    #[error("distribution has no components")]
    EmptyDistribution,
    #[error("component weight {0} is not positive")]
    NonPositiveWeight(String),
    #[error("weights sum to {0}, expected 1")]
    WeightSum(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("verification window [{low}, {high}) is inconsistent with the distributions: {reason}")]
    WindowInconsistent { low: i64, high: i64, reason: String },
    #[error("support exceeds the quotient window: {0}")]
    SupportExceedsWindow(String),
    #[error("window too large: {0}")]
    WindowTooLarge(String),
}
