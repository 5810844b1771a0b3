use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("negative mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("total mass is zero or not finite")]
    ZeroMass,

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("stationary distribution does not decay within {states} states")]
    Divergence { states: usize },

    #[error("birth rate vanishes at interior state {state}")]
    SingularRate { state: i64 },

    #[error("no analytic Stein constant for {0}")]
    NoAnalyticConstant(String),

    #[error("parameter matching failed: {0}")]
    MatchingFailure(String),

    #[error("enumeration needs {needed} configurations, budget is {budget}")]
    BudgetExceeded { needed: f64, budget: f64 },

    #[error("inconsistent certificate: {0}")]
    Certificate(String),

    #[error("law has support below zero (offset {0})")]
    NegativeSupport(i64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
