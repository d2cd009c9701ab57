//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the shape encoding and matching pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mask contains no foreground pixel")]
    EmptyMask,

    #[error("largest foreground region has fewer than 3 boundary pixels")]
    DegenerateRegion,

    #[error("contour needs at least 3 distinct points, got {0}")]
    TooFewPoints(usize),

    #[error("contour contains a non-finite coordinate")]
    NonFinitePoint,

    #[error("contour has zero spatial extent")]
    ZeroExtent,

    #[error("histogram dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("correspondence needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),

    #[error("matched source points are coincident; similarity transform is undefined")]
    DegenerateCorrespondence,

    #[error("contours have different point counts: {0} vs {1}")]
    PointCountMismatch(usize, usize),

    #[error("point at distance {dist} lies outside the surrounding circle of radius {radius}")]
    OutsideCircle { dist: f64, radius: f64 },

    #[error("section chord endpoints coincide")]
    ZeroChord,

    #[error("invalid token name {0:?}")]
    InvalidToken(String),

    #[error("symbol string length {0} is not a multiple of 5")]
    BadQuintupleLength(usize),

    #[error("token {0} breaks the (area, d1, d2, angle, degree) quintuple order")]
    QuintupleOrder(usize),

    #[error("DP matrix has no consistent predecessor at cell ({0}, {1})")]
    InconsistentMatrix(usize, usize),

    #[error("record fingerprint {record} does not match index fingerprint {index}")]
    FingerprintMismatch { record: String, index: String },

    #[error("duplicate record id {0:?}")]
    DuplicateId(String),

    #[error("record {0:?} has an empty symbol string")]
    EmptySymbols(String),

    #[error("index is empty")]
    EmptyIndex,

    #[error("record {0:?} has no class label")]
    UnlabeledRecord(String),

    #[error("class sizes are unequal: {0}")]
    UnequalClassSizes(String),

    #[error("unsupported index format version {0}")]
    UnsupportedIndexVersion(u32),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
