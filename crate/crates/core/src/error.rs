use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not an almost complex structure: |J^2 + id| = {defect:e}")]
    NotAlmostComplex { defect: f64 },

    #[error("complex structure is not integrable: Nijenhuis norm {norm:e}")]
    NotIntegrable { norm: f64 },

    #[error("metric is not compatible with J: defect {defect:e}")]
    Incompatible { defect: f64 },

    #[error("metric is not positive definite (minimal eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("connection is not flat: curvature norm {norm:e}")]
    NotFlat { norm: f64 },

    #[error("no flat Hermitian connection of the canonical type: the algebra is perfect ([g, g] = g)")]
    NoSuchConnection,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("inadmissible parameters for `{entry}`: {predicate}")]
    Inadmissible { entry: String, predicate: String },

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
