use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain { name: &'static str, value: f64, domain: &'static str },

    #[error("cube dimension {0} is outside 1..={max}", max = crate::cube::MAX_DIM)]
    Dimension(u32),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: u32, got: u32 },

    #[error("{what}: expected length {expected}, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },

    #[error("point {point:#x} does not fit in dimension {n}")]
    PointOutOfRange { point: usize, n: u32 },

    #[error("table length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("operation requires a nonempty set")]
    EmptySet,

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "bounded difference violated at coordinate {coord}: |f({x:#x}) - f({y:#x})| = {diff} > {bound}"
    )]
    BoundedDifference { coord: usize, x: usize, y: usize, diff: f64, bound: f64 },

    #[error("degenerate family: {0}")]
    Family(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain { name, value, domain }
    }
}
