use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not Hermitian: max |A - A†| = {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("trace is not one: Tr = {trace}")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("vector is not normalized: |v|² = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("matrix is not unitary: max |U†U - I| = {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("block index m = {m} out of range 1..={k}")]
    BlockOutOfRange { m: usize, k: usize },

    #[error("Weyl index ({s}, {t}) out of range 1..={d}")]
    WeylOutOfRange { s: usize, t: usize, d: usize },

    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("state is not maximally entangled")]
    NotMaximallyEntangled,

    #[error("no correction given for outcome (s={s}, t={t}, m={m})")]
    MissingCorrection { s: usize, t: usize, m: usize },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}
