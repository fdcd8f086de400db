use std::fmt;

use thiserror::Error;

/// Where in an input file a parse failure happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    /// 1-based line of a text file.
    Line(u64),
    /// Byte offset into a binary file.
    Offset(u64),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Line(l) => write!(f, "line {l}"),
            Position::Offset(o) => write!(f, "byte offset {o}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {context}")]
    NonFiniteValue { context: String },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("category `{0}` appears in both domains")]
    DuplicateCategory(String),

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("supply total {supply} does not match demand total {demand}")]
    InfeasibleProblem { supply: f64, demand: f64 },

    #[error("invalid cost {value} at ({row}, {col})")]
    InvalidCost { row: usize, col: usize, value: f64 },

    #[error("invalid mass {value} at index {index}")]
    InvalidMass { index: usize, value: f64 },

    #[error("transport plan carries no flow")]
    DegeneratePlan,

    #[error("solver did not converge after {0} pivots")]
    IterationLimit(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("category `{0}` has zero images")]
    ZeroCount(String),

    #[error("image ids are required for sampling but only counts were provided")]
    MissingImageIds,

    #[error("duplicate image id `{image_id}` in category `{category_id}`")]
    DuplicateImageId {
        category_id: String,
        image_id: String,
    },

    #[error("parse error at {position}: {message}")]
    Parse { position: Position, message: String },

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    BadVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse_at(position: Position, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
