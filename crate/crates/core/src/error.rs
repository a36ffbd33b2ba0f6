use thiserror::Error;

#[derive(Debug, Error)]
pub enum KsError {
    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("barycenter mismatch: deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    BarycenterMismatch { deviation: f64, tolerance: f64 },

    #[error("eta domain error: argument {0} outside [0, 1]")]
    EtaDomain(f64),

    #[error("non-commuting projection families: commutator norm {norm:.3e}{}", depth.map(|k| format!(" at depth {k}")).unwrap_or_default())]
    NonCommuting { norm: f64, depth: Option<usize> },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid projection family: {0}")]
    InvalidFamily(String),

    #[error("complexity budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("unclassifiable atom: {0}")]
    UnclassifiableAtom(String),

    #[error("empty candidate set")]
    EmptyCandidates,

    #[error("all {0} candidates failed during search")]
    AllCandidatesFailed(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, KsError>;
