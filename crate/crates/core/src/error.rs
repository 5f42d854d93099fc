use thiserror::Error;

/// Identifies a summand of a representation: `(degree, index within that degree)`.
pub type TermId = (usize, usize);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grade {grade} is out of range for dimension {dim}")]
    GradeOutOfRange { grade: usize, dim: usize },

    #[error("grade mismatch: {0} vs {1}")]
    GradeMismatch(usize, usize),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("vectors are linearly dependent")]
    LinearlyDependent,

    #[error("invalid orientation: {0}")]
    InvalidOrientation(String),

    #[error("k-vector and cone are not complementary")]
    NotComplementary,

    #[error("join volume undefined for pair {pair:?}: {reason}")]
    PartialFunctionDomain { pair: (usize, usize), reason: String },

    #[error("representations are not transversal ({} failing pairs)", pairs.len())]
    NotTransversal { pairs: Vec<(TermId, TermId)> },

    #[error("polytopes are not in general position ({} failing face pairs)", pairs.len())]
    NotInGeneralPosition { pairs: Vec<(TermId, TermId)> },

    #[error("malformed representation: {0}")]
    MalformedRep(String),

    #[error("degree-0 part is not constant")]
    NonConstantAlpha,

    #[error("scale factor must be positive")]
    InvalidScale,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
