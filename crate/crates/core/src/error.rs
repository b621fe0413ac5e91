use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Each variant maps to a stable category string (see [`Error::category`])
/// which the CLI uses for exit codes and machine-readable diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed polygon: {0}")]
    MalformedPolygon(String),
    #[error("degenerate polygon (area {0:e})")]
    DegeneratePolygon(f64),
    #[error("child {child} of tile {parent} lies outside its parent by {excess:e}")]
    ChildOutsideParent {
        parent: usize,
        child: usize,
        excess: f64,
    },
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("projected tile count {projected} exceeds the limit {limit}")]
    CapacityExceeded { projected: u128, limit: u128 },
    #[error("substitution matrix is not primitive")]
    NotPrimitive,
    #[error("power iteration did not converge within {0} iterations")]
    PowerIterationStalled(usize),
    #[error("zero vector")]
    ZeroVector,
    #[error("empty patch")]
    EmptyPatch,
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("square at ({x}, {y}) with edge {edge} contains no net point")]
    EmptySquare { x: i64, y: i64, edge: i64 },
    #[error("query region leaves the safe region of the net")]
    OutsideSafeRegion,
    #[error("window too small: no admissible square of edge {0}")]
    WindowTooSmall(f64),
    #[error("no matching covering the required points within distance cap {0}")]
    NoPerfectMatchingUnderCap(f64),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error at line {line}: {message}")]
    Semantic { line: usize, message: String },
    #[error("rule failed validation: {0}")]
    Validation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::MalformedPolygon(_)
            | Error::DegeneratePolygon(_)
            | Error::ChildOutsideParent { .. }
            | Error::InvalidRule(_)
            | Error::Validation(_) => "validation",
            Error::CapacityExceeded { .. } => "capacity",
            Error::NotPrimitive | Error::PowerIterationStalled(_) | Error::ZeroVector => {
                "spectral"
            }
            Error::EmptyPatch | Error::TooFewPoints(_) => "net",
            Error::EmptySquare { .. } | Error::OutsideSafeRegion | Error::WindowTooSmall(_) => {
                "discrepancy"
            }
            Error::NoPerfectMatchingUnderCap(_) => "matching",
            Error::Syntax { .. } | Error::Semantic { .. } => "parse",
            Error::InvalidArgument(_) => "usage",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
