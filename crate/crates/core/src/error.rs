use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid state matrix: {0}")]
    InvalidMatrix(String),

    #[error("all columns of the state matrix are zero")]
    AllZeroMatrix,

    #[error("vectors are linearly dependent (rank {rank}, need {needed})")]
    RankDeficient { rank: usize, needed: usize },

    #[error("facet orientation is ambiguous: every ray lies in the facet span")]
    AmbiguousOrientation,

    #[error("element {0:?} is not part of the cone lattice")]
    UnknownElement(Vec<usize>),

    #[error("NNLS did not converge within {0} iterations")]
    IterationLimit(usize),

    #[error("budget exceeded: {what} = {value} > {limit}")]
    BudgetExceeded {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid spike data: {0}")]
    InvalidSpikes(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
