use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("capacity exceeded: {what} needs {required}, limit is {limit}")]
    Capacity {
        what: &'static str,
        required: usize,
        limit: usize,
    },

    #[error("linear program is infeasible (row {row} cannot be satisfied)")]
    Infeasible { row: usize },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration limit of {0} exceeded")]
    IterationLimit(usize),

    #[error("beam budget exhausted: {0} beams are not enough")]
    BudgetExhausted(usize),

    #[error("presolve left no unassigned users; nothing to anneal")]
    NothingToAnneal,

    #[error("format error: {0}")]
    Format(String),

    #[error("transport error: {0}")]
    Transport(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
