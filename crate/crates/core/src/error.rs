use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph parameters: {0}")]
    InvalidGraph(String),

    #[error("vertex {index} out of range for graph with {size} vertices")]
    InvalidVertex { index: u64, size: u64 },

    #[error("{what} needs {needed} units of work, budget is {cap}")]
    BudgetExceeded { what: &'static str, needed: u128, cap: u64 },

    #[error("vertex {0} is isolated")]
    IsolatedVertex(u64),

    #[error("cover walk exceeded {0} steps")]
    WalkBudget(u64),

    #[error("instance has no designated minimum")]
    NoDesignatedMinimum,

    #[error("unsupported for this graph family: {0}")]
    Unsupported(&'static str),

    #[error("relation has a zero row or column sum ({side} input {index})")]
    DegenerateRelation { side: &'static str, index: usize },

    #[error("relation shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("negative relation weight at ({0}, {1})")]
    NegativeWeight(usize, usize),

    #[error("no related pair differs at any position")]
    NoQualifyingTriple,

    #[error("unknown {kind} {index}")]
    UnknownIndex { kind: &'static str, index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
