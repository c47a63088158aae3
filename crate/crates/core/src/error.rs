use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("function undefined on eigenvalue {eigenvalue}")]
    Domain { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("model {index} is rank deficient (smallest eigenvalue {eigenvalue:e})")]
    Rank { index: usize, eigenvalue: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("exhaustive search over {bits} bits exceeds the {limit}-bit limit")]
    Budget { bits: usize, limit: usize },

    #[error("register of {bits} qubits exceeds the dense simulation limit of {limit}")]
    Size { bits: usize, limit: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
