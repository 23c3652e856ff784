use thiserror::Error;

pub type Result<T> = std::result::Result<T, LensError>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Caller supplied an invalid argument or inconsistent inputs.
    Config,
    /// The data itself is unusable (non-finite, too short, malformed).
    Data,
    /// The data is well formed but numerically degenerate.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LensError {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("non-finite value in column `{column}` at row {row}")]
    NonFinite { column: String, row: usize },

    #[error("too few observations: have {n}, need at least {required}")]
    TooFewObservations { n: usize, required: usize },

    #[error("differenced sample has {rows} rows, need more than {p}")]
    InsufficientDifferencedSample { rows: usize, p: usize },

    #[error("degenerate regressor `{0}`: column is constant after centering")]
    DegenerateRegressor(String),

    #[error(
        "complete multicollinearity among [{}] (singular value ratio {ratio:.3e})",
        .columns.join(", ")
    )]
    CompleteMulticollinearity { columns: Vec<String>, ratio: f64 },

    #[error("structural collinearity in B (condition number {condition:.3e})")]
    StructuralCollinearity { condition: f64 },

    #[error("transform matrix is singular or ill-conditioned (condition number {condition:.3e})")]
    SingularTransform { condition: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "weight vector and difference vector were built under different observation orderings"
    )]
    OrderingMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl LensError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            LensError::InvalidDataset(_)
            | LensError::NonFinite { .. }
            | LensError::TooFewObservations { .. }
            | LensError::InsufficientDifferencedSample { .. } => ErrorKind::Data,
            LensError::DegenerateRegressor(_)
            | LensError::CompleteMulticollinearity { .. }
            | LensError::StructuralCollinearity { .. }
            | LensError::SingularTransform { .. } => ErrorKind::Numerical,
            LensError::DimensionMismatch(_)
            | LensError::OrderingMismatch
            | LensError::InvalidArgument(_) => ErrorKind::Config,
        }
    }

    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            LensError::InvalidDataset(_) => "invalid_dataset",
            LensError::NonFinite { .. } => "non_finite",
            LensError::TooFewObservations { .. } => "too_few_observations",
            LensError::InsufficientDifferencedSample { .. } => "insufficient_differenced_sample",
            LensError::DegenerateRegressor(_) => "degenerate_regressor",
            LensError::CompleteMulticollinearity { .. } => "complete_multicollinearity",
            LensError::StructuralCollinearity { .. } => "structural_collinearity",
            LensError::SingularTransform { .. } => "singular_transform",
            LensError::DimensionMismatch(_) => "dimension_mismatch",
            LensError::OrderingMismatch => "ordering_mismatch",
            LensError::InvalidArgument(_) => "invalid_argument",
        }
    }
}
