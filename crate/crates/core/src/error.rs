use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis size {0} is too small (need N >= 2)")]
    DimensionTooSmall(usize),

    #[error("remainder R_{0} is not positive")]
    NonPositiveRemainder(usize),

    #[error("explicit model supplies {given} remainders but N = {dim} needs {needed}")]
    MissingRemainders { given: usize, needed: usize, dim: usize },

    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("coupling alpha must be nonzero and finite")]
    ZeroCoupling,

    #[error("operator is not diagonal (entry ({row}, {col}) = {value:e})")]
    NotDiagonal { row: usize, col: usize, value: f64 },

    #[error("block index {m} out of range (max {max})")]
    BlockOutOfRange { m: usize, max: usize },

    #[error("ladder energy E_{0} vanishes")]
    DegenerateLadder(usize),

    #[error("invalid frequency {0}")]
    InvalidFrequency(f64),

    #[error("resonant evolution requested with detuning {0}")]
    NotResonant(f64),

    #[error("series argument norm*t = {0:.3} exceeds the convergence budget")]
    ConvergenceBudgetExceeded(f64),

    #[error("backend `{backend}` cannot be used here: {reason}")]
    BackendDomainError { backend: &'static str, reason: String },

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("quadrature did not converge within {nodes} nodes (last change {change:e})")]
    NoConvergence { nodes: usize, change: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("state is not normalized (norm {0})")]
    NonNormalizedState(f64),

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("invalid `{field}`: {reason}")]
    ValidationError { field: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionTooSmall(_) => "DimensionTooSmall",
            Error::NonPositiveRemainder(_) => "NonPositiveRemainder",
            Error::MissingRemainders { .. } => "MissingRemainders",
            Error::InvalidModel(_) => "InvalidModel",
            Error::ZeroCoupling => "ZeroCoupling",
            Error::NotDiagonal { .. } => "NotDiagonal",
            Error::BlockOutOfRange { .. } => "BlockOutOfRange",
            Error::DegenerateLadder(_) => "DegenerateLadder",
            Error::InvalidFrequency(_) => "InvalidFrequency",
            Error::NotResonant(_) => "NotResonant",
            Error::ConvergenceBudgetExceeded(_) => "ConvergenceBudgetExceeded",
            Error::BackendDomainError { .. } => "BackendDomainError",
            Error::NotHermitian(_) => "NotHermitian",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::NonNormalizedState(_) => "NonNormalizedState",
            Error::ParseError { .. } => "ParseError",
            Error::UnknownKey(_) => "UnknownKey",
            Error::ValidationError { .. } => "ValidationError",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
