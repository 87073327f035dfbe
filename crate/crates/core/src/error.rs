use thiserror::Error;

/// Errors raised by the channel, network, precoding and metric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The analog network matrix does not have full column rank.
    #[error("singular network: smallest/largest singular value ratio {ratio:.3e} is below {threshold:.0e}")]
    SingularNetwork { ratio: f64, threshold: f64 },

    #[error("rank-deficient effective channel: rank {rank} < {streams} streams")]
    RankDeficientEffectiveChannel { rank: usize, streams: usize },

    /// Sparse storage for the vectorized network operator would exceed the budget.
    #[error("operator needs {requested} entries, budget is {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },

    /// A simulation configuration field is out of range.
    #[error("{field}: {message}")]
    Config { field: &'static str, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
