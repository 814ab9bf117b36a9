use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("linear map is singular")]
    Singular,
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("zero bracket: μ=0 has no stratum")]
    ZeroBracket,
    #[error("empty point set")]
    EmptyPointSet,
    #[error("duplicate point at index {0}")]
    DuplicatePoint(usize),
    #[error("point set too large for brute force: {len} points, cap {cap}")]
    CapExceeded { len: usize, cap: usize },
    #[error("weight is not sorted nondecreasingly")]
    UnsortedWeight,
    #[error("β + ‖β‖²I is not positive definite (minimal entry {0})")]
    NonPositiveShift(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("bracket does not satisfy the Jacobi identity (residual {0:e})")]
    NotJacobi(f64),
    #[error("not solvable: {0}")]
    NotSolvable(String),
    #[error("bracket leaves the nilradical block: {0}")]
    BracketLeavesN(String),
    #[error("not a derivation: residual {0:e}")]
    NotDerivation(f64),
    #[error("Einstein constant must be negative, got {0}")]
    NonNegativeConstant(f64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
