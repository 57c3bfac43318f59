use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size limit exceeded: {what} = {value} (limit {limit})")]
    SizeLimit {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("unknown variable index {0}")]
    UnknownVariable(usize),

    #[error("logarithm of a series with constant term {0} (must be 1)")]
    LogConstantTerm(String),

    #[error("identity failed: {check} at order {order}: {detail}")]
    IdentityFailure {
        check: &'static str,
        order: usize,
        detail: String,
    },

    #[error("inequality failed: {check}: {witness}")]
    InequalityFailure { check: &'static str, witness: String },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimate {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("decay fit failed: {0}")]
    FitFailure(String),

    #[error("covariance generation failed: {0}")]
    Generation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
