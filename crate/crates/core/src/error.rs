use thiserror::Error;

use crate::model::TupleId;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("structural error: {0}")]
    Structure(String),

    #[error("tuple {0} appears in more than one cluster")]
    OverlappingClusters(TupleId),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("constraint set is unsatisfiable")]
    UnsatisfiableConstraints,

    #[error("constraint {constraint} has lower bound {lo} below k = {k}")]
    LowerBoundBelowK { constraint: String, lo: u64, k: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("search budget exceeded: more than {cap} candidate clusterings tried for constraint {constraint}")]
    SearchBudgetExceeded { constraint: String, cap: usize },

    #[error("a diverse clustering exists but no valid publication could be completed: {0}")]
    Completion(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
