use thiserror::Error;

/// Errors raised by the library. Every variant has a stable machine-readable
/// code, see [`Error::code`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precision overflow: {0}")]
    PrecisionOverflow(String),
    #[error("non-integral coefficient: {0}")]
    NonIntegral(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("theory mismatch: {0}")]
    TheoryMismatch(String),
    #[error("quadric mismatch: {0}")]
    QuadricMismatch(String),
    #[error("truncation too small: {0}")]
    Truncation(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not computable by traces alone: {0}")]
    NotComputable(String),
    #[error("incompatible index sets: {0}")]
    IncompatibleIndexSets(String),
    #[error("outer connection violated: {0}")]
    OuterViolation(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("singular matrix: {0}")]
    Singular(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::PrecisionOverflow(_) => "precision_overflow",
            Error::NonIntegral(_) => "non_integral",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::TheoryMismatch(_) => "theory_mismatch",
            Error::QuadricMismatch(_) => "quadric_mismatch",
            Error::Truncation(_) => "truncation_too_small",
            Error::OutOfRange(_) => "out_of_range",
            Error::Unsupported(_) => "unsupported",
            Error::NotComputable(_) => "not_computable",
            Error::IncompatibleIndexSets(_) => "incompatible_index_sets",
            Error::OuterViolation(_) => "outer_violation",
            Error::MissingData(_) => "missing_data",
            Error::Parity(_) => "parity",
            Error::ModeMismatch(_) => "mode_mismatch",
            Error::Singular(_) => "singular",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
