use thiserror::Error;

/// Errors raised by constructors and operations across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distance table is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("point index {index} out of range for a space of {size} points")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("product of size {size} exceeds the configured cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("weights are not on the simplex (sum = {sum})")]
    NotOnSimplex { sum: f64 },

    #[error("invalid weight {0}")]
    InvalidWeight(f64),

    #[error("measure has empty support")]
    EmptySupport,

    #[error("support and weight lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("objects live on different spaces")]
    SpaceMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("map is not uniform: {0}")]
    NotUniform(String),

    #[error("ragged nesting: {0}")]
    Ragged(String),

    #[error("multiplicity must be at least 1")]
    ZeroMultiplicity,

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("measure has no exact rational weights")]
    NotRational,

    #[error("common denominator {den} exceeds the brute-force limit {limit}")]
    DenominatorTooLarge { den: u64, limit: u64 },

    #[error("dual potential is not 1-Lipschitz: |f({x}) - f({y})| exceeds d = {dist}")]
    NotLipschitz { x: usize, y: usize, dist: f64 },

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// A short stable identifier for machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "not_square",
            Error::InvalidMetric(_) => "metric",
            Error::IndexOutOfRange { .. } => "index",
            Error::SizeCap { .. } => "size_cap",
            Error::NotOnSimplex { .. } => "simplex",
            Error::InvalidWeight(_) => "weight",
            Error::EmptySupport => "empty_support",
            Error::LengthMismatch(..) => "length",
            Error::SpaceMismatch => "space_mismatch",
            Error::DimensionMismatch { .. } => "dimension",
            Error::NotUniform(_) => "not_uniform",
            Error::Ragged(_) => "ragged",
            Error::ZeroMultiplicity => "zero_multiplicity",
            Error::OutOfRange(_) => "out_of_range",
            Error::NotRational => "not_rational",
            Error::DenominatorTooLarge { .. } => "denominator",
            Error::NotLipschitz { .. } => "not_lipschitz",
            Error::Solver(_) => "solver",
        }
    }
}
