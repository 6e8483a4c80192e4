use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected} entries, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("non-integral lattice energy {value} at string index {index}")]
    NonIntegralEnergy { index: usize, value: f64 },

    #[error("enumeration cap exceeded: {size} basis strings > cap {cap}")]
    CapExceeded { size: u128, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("optimal set is empty (no feasible string)")]
    EmptyOptimalSet,

    #[error("subset is empty")]
    EmptySubset,

    #[error("filtered law has zero denominator")]
    ZeroDenominator,

    #[error("energy gap is zero: a non-optimal string shares the optimal energy")]
    ZeroEnergyGap,

    #[error("string is already feasible")]
    AlreadyFeasible,

    #[error("invalid document: {0}")]
    Document(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
