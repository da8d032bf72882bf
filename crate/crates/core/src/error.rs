use thiserror::Error;

/// Everything that can go wrong while building joints or evaluating indices.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("rows have inconsistent lengths (row {row} has {found} entries, expected {expected})")]
    RaggedMatrix {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("entry ({row}, {col}) is not a finite number")]
    NonFinite { row: usize, col: usize },
    #[error("entry ({row}, {col}) is negative: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("{axis} atom {index} has zero marginal mass")]
    ZeroMarginal { axis: &'static str, index: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular value decomposition did not converge")]
    SvdFailure,
    #[error("iteration did not converge after {iterations} steps")]
    NonConvergence { iterations: usize },
    #[error("{block} is not positive definite (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { block: &'static str, eigenvalue: f64 },
    #[error("invalid covariance block: {0}")]
    InvalidBlock(String),
    #[error("operation needs scalar X and Y blocks")]
    NotScalar,
    #[error("conditional p(x={x} | y={y}) = {value} is negative")]
    NegativeConditional { x: usize, y: usize, value: f64 },
    #[error("component {index} sums to {sum}, not 0")]
    ComponentNotCentered { index: usize, sum: f64 },
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyMatrix => "EmptyMatrix",
            Error::RaggedMatrix { .. } => "RaggedMatrix",
            Error::NonFinite { .. } => "NonFinite",
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::ZeroMarginal { .. } => "ZeroMarginal",
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::InvalidPartition(_) => "InvalidPartition",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::SvdFailure => "SvdFailure",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::InvalidBlock(_) => "InvalidBlock",
            Error::NotScalar => "NotScalar",
            Error::NegativeConditional { .. } => "NegativeConditional",
            Error::ComponentNotCentered { .. } => "ComponentNotCentered",
            Error::TooFewSamples(_) => "TooFewSamples",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SvdFailure | Error::NonConvergence { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
