use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma = {0} is outside the admissible range")]
    GammaOutOfRange(f64),

    #[error("invalid segment {index}: length {len}, value {val}")]
    InvalidSegment { index: usize, len: f64, val: f64 },

    #[error("star graph needs at least one edge")]
    NoEdges,

    #[error("field has {found} edge potentials but the graph has {expected} edges")]
    EdgeCountMismatch { expected: usize, found: usize },

    #[error("edge index {index} out of range 1..={n_edges}")]
    EdgeIndexOutOfRange { index: usize, n_edges: usize },

    #[error("offset {offset} is smaller than the left support extent {extent}")]
    OffsetTooSmall { offset: f64, extent: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("potential on edge {edge} has support {support} beyond the grid length {length}")]
    SupportExceedsGrid { edge: usize, support: f64, length: f64 },

    #[error("operation requires an even number of edges, got {0}")]
    OddEdgeCount(usize),

    #[error("operation requires an odd number of edges, got {0}")]
    EvenEdgeCount(usize),

    #[error("edge subset must be a nonempty proper subset of the edges")]
    EmptySplit,

    #[error("zero pivot in the factorization at shift {shift}")]
    PivotBreakdown { shift: f64 },

    #[error("inverse iteration did not converge at eigenvalue {eigenvalue}")]
    NoConvergence { eigenvalue: f64 },

    #[error("operation is not defined for {0}")]
    Unsupported(&'static str),

    #[error("negative part of the potential vanishes")]
    ZeroNorm,

    #[error("kappa must be positive, got {0}")]
    NonpositiveKappa(f64),

    #[error("delta strength must be positive, got {0}")]
    NonpositiveAlpha(f64),

    #[error("sector {ell} out of range 0..{n_edges}")]
    SectorOutOfRange { ell: usize, n_edges: usize },

    #[error("eigenvalue cluster near {eigenvalue} has gap {gap}")]
    DegenerateSpectrum { eigenvalue: f64, gap: f64 },

    #[error("N0 = {n0} and N = {n} must both be odd with N0 < N")]
    ParityViolation { n0: usize, n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}
