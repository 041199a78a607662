use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too many degenerate splits ({0}) in one realization")]
    TooManyDegenerateSplits(usize),

    #[error("cell division depth exceeded {0}")]
    DepthLimitExceeded(usize),

    #[error("inconsistent complex: {0}")]
    InconsistentComplex(String),

    #[error("unknown cell id {0}")]
    UnknownCell(usize),

    #[error("no eligible cells in sample")]
    EmptySample,

    #[error("need at least 2 points, got {0}")]
    InsufficientPoints(usize),

    #[error("displacement ({0}, {1}) leaves no window overlap")]
    ZeroOverlap(f64, f64),
}
