use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation's precondition does not hold for its input.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A combinatorial expansion or enumeration exceeded its configured size.
    #[error("budget exceeded: {what} reached {reached} (limit {limit})")]
    Budget {
        what: String,
        reached: usize,
        limit: usize,
    },

    /// A small divisor fell below the guaranteed floor.
    #[error("small divisor {value:.3e} below floor {floor:.3e} at {witness}")]
    SmallDivisor {
        witness: String,
        value: f64,
        floor: f64,
    },

    /// The smallness condition of the iteration does not hold.
    #[error("smallness gate violated: ln(gate) = {ln_gate:.3} >= 0")]
    Gate { ln_gate: f64 },

    /// A root finder could not bracket a solution.
    #[error("no root: {0}")]
    NoRoot(String),

    /// Integration produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Budget { .. } => 3,
            _ => 1,
        }
    }
}
