use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("structure matrix {index} is not skew-symmetric (max |U + U^T| = {deviation:e})")]
    NotSkewSymmetric { index: usize, deviation: f64 },

    #[error("structure matrices are linearly dependent (rank {rank} < m = {m})")]
    DependentStructureMatrices { rank: usize, m: usize },

    #[error("V_lambda is numerically singular (normalized |det| = {det:e})")]
    SingularPencil { det: f64 },

    #[error("iteration failed to converge: {0}")]
    NonConvergence(String),

    #[error("{what} = {value} exceeds the supported range (max {max})")]
    RangeExceeded {
        what: &'static str,
        value: f64,
        max: f64,
    },

    #[error("point at radius {radius} lies outside the grid support r_max = {r_max}")]
    OutOfDomain { radius: f64, r_max: f64 },

    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(usize),

    #[error("non-finite value at node {index}")]
    NonFiniteValue { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("malformed file at offset {offset}: {reason}")]
    MalformedFile { offset: usize, reason: String },

    #[error("unsupported file version {found}")]
    VersionMismatch { found: u64 },

    #[error("truncation error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    TruncationDominates { estimate: f64, tolerance: f64 },

    #[error("angular mode {mode} not resolved by {samples} samples")]
    NyquistViolation { mode: i64, samples: usize },

    #[error("field is not homogeneous of the requested type (deviation {deviation:e})")]
    NotHomogeneous { deviation: f64 },

    #[error("finite-difference estimate unreliable (Richardson disagreement {disagreement:e})")]
    GridTooCoarse { disagreement: f64 },

    #[error("no supplied radius can recover any degree")]
    NoUsableRadius,

    #[error("radii ({r1}, {r2}) are not admissible within the search bounds")]
    InadmissibleRadii { r1: f64, r2: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
