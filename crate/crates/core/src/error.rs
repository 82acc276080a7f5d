use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {value} in dimension {dim} lies outside the unit interval")]
    Domain { dim: usize, value: f64 },

    #[error("uniform variate {0} lies outside [0, 1]")]
    VariateOutOfRange(f64),

    #[error("cannot sample a linear segment with zero mass")]
    DegenerateMass,

    #[error("dimension {dim} is outside the supported range 1..={max}")]
    Dimension { dim: usize, max: usize },

    #[error("invalid cell: {0}")]
    InvalidCell(String),

    #[error("invalid edges in dimension {dim}: {reason}")]
    InvalidEdges { dim: usize, reason: String },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("density {value} at vertex {coords:?} is negative or not finite")]
    NegativeDensity { coords: Vec<f64>, value: f64 },

    #[error("{count} vertices exceeds the limit of {max}")]
    TooManyVertices { count: u128, max: usize },

    #[error("total mass is zero")]
    ZeroMass,

    #[error("cell index {index} out of range for {len} cells")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("expected {expected} vertex values, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("value at flat index {index} is not a finite non-negative number: {text}")]
    BadValue { index: usize, text: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("leaf at depth {depth} cannot be split beyond max depth {max_depth}")]
    DepthLimit { depth: u32, max_depth: u32 },

    #[error("tree has no density callback attached")]
    NoPdf,

    #[error("sobol sequence exhausted: row index {0} is beyond 2^31")]
    SequenceExhausted(u64),

    #[error("scrambling is not applicable to {0} streams")]
    NotApplicable(&'static str),

    #[error("stream width {found} does not match structure dimension + 1 = {expected}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("sampler needs at least one density structure")]
    EmptyStructures,

    #[error("structures disagree on dimension: {0} vs {1}")]
    MixedDimensions(usize, usize),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
