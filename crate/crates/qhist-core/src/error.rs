use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entry is not finite (NaN or infinity)")]
    NonFinite,

    #[error("invalid tolerance: eps_zero={eps_zero}, eps_prob={eps_prob}")]
    InvalidTolerance { eps_zero: f64, eps_prob: f64 },

    #[error("vectors {a} and {b} are not orthonormal (overlap magnitude {overlap:.3e})")]
    NotOrthonormal { a: usize, b: usize, overlap: f64 },

    #[error("vector {index} is not normalized (norm {norm})")]
    NotNormalized { index: usize, norm: f64 },

    #[error("matrix is not a projector: {reason} (deviation {deviation:.3e})")]
    NotProjector { reason: String, deviation: f64 },

    #[error("degenerate input: residual norm {residual:.3e} under tolerance during orthonormalization")]
    DegenerateInput { residual: f64 },

    #[error("branch {branch:?} is invalid for this family: {reason}")]
    InvalidBranch { branch: Vec<usize>, reason: String },

    #[error("duplicate branch {branch:?} in branch list")]
    DuplicateBranch { branch: Vec<usize> },

    #[error("slot labels are not unique at time {time}: {label:?}")]
    DuplicateLabel { time: usize, label: String },

    #[error("too many branches: {count} exceeds cap {cap}")]
    TooManyBranches { count: u128, cap: u128 },

    #[error("too many coarse-grainings: {count} exceeds cap {cap}")]
    TooManyGrainings { count: u128, cap: u128 },

    #[error("branch set is empty")]
    EmptySet,

    #[error("projector {index} at time {time} has rank {rank}, expected rank 1")]
    NonRankOneSlot { time: usize, index: usize, rank: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid search parameters: {0}")]
    InvalidSearchParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
