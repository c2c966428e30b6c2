use thiserror::Error;

/// Errors produced by the blur library and its CLI plumbing.
#[derive(Debug, Error)]
pub enum BlurError {
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature term left the representable floating-point range.
    #[error("quadrature term n={index} is not representable: {reason}")]
    Overflow { index: i64, reason: String },

    #[error("ill-conditioned RBF system: {detail}; reduce the RBF standard deviation or thin the points")]
    Conditioning { detail: String },

    #[error("rank-deficient least-squares design ({rank} of {cols} columns independent)")]
    RankDeficient { rank: usize, cols: usize },

    #[error("dense materialization of {n}x{n} exceeds guard {limit}; override to proceed")]
    Guard { n: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("duplicate location at rows {first} and {second}")]
    DuplicateLocation { first: usize, second: usize },

    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse { row: usize, column: String, reason: String },

    #[error("empty input")]
    EmptyInput,

    #[error("operator is not circulant (max deviation {deviation:.3e}, tolerance {tolerance:.3e})")]
    NotCirculant { deviation: f64, tolerance: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl BlurError {
    /// Process exit code used by the CLI: 1 parse/input, 2 conditioning,
    /// 3 guard, 4 domain.
    pub fn exit_code(&self) -> i32 {
        match self {
            BlurError::Parse { .. }
            | BlurError::EmptyInput
            | BlurError::DuplicateLocation { .. }
            | BlurError::DimensionMismatch { .. }
            | BlurError::Io(_) => 1,
            BlurError::Conditioning { .. } | BlurError::RankDeficient { .. } => 2,
            BlurError::Guard { .. } => 3,
            BlurError::Domain(_) | BlurError::Overflow { .. } | BlurError::NotCirculant { .. } => 4,
        }
    }

    /// Short stable identifier for scripting.
    pub fn kind(&self) -> &'static str {
        match self {
            BlurError::Domain(_) => "domain",
            BlurError::Overflow { .. } => "overflow",
            BlurError::Conditioning { .. } => "conditioning",
            BlurError::RankDeficient { .. } => "rank_deficient",
            BlurError::Guard { .. } => "guard",
            BlurError::DimensionMismatch { .. } => "dimension_mismatch",
            BlurError::DuplicateLocation { .. } => "duplicate_location",
            BlurError::Parse { .. } => "parse",
            BlurError::EmptyInput => "empty_input",
            BlurError::NotCirculant { .. } => "not_circulant",
            BlurError::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, BlurError>;
