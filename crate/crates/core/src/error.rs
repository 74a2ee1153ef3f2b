use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),

    #[error("unknown facet id {0}")]
    UnknownFacet(usize),

    #[error("basis index {index} out of range (basis has {len} functions)")]
    BasisIndex { index: usize, len: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("truncation parameter must be positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("matrix is singular (zero pivot in column {0})")]
    Singular(usize),

    #[error("SVD did not converge within {0} sweeps")]
    SvdNoConvergence(usize),

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension mismatch: operator is {op}D, mesh is {mesh}D")]
    Dimension { op: usize, mesh: usize },

    #[error("invalid differential operator: {0}")]
    InvalidOperator(String),

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
