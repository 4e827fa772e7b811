use thiserror::Error;

/// Errors raised by the grid, kernel, field, solver and probe layers.
///
/// Display strings are stable: the CLI prints them verbatim and scripts
/// match on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible domain")]
    InfeasibleDomain,
    #[error("bad Φ table: expected {expected} samples, got {got}")]
    BadPhiTable { expected: usize, got: usize },
    #[error("cannot normalize")]
    CannotNormalize,
    #[error("empty truncation")]
    EmptyTruncation,
    #[error("mollifier under-resolved (eps = {eps}, h = {h})")]
    MollifierUnderResolved { eps: f64, h: f64 },
    #[error("mollification leaves grid")]
    MollifierLeavesGrid,
    #[error("translation out of bounds")]
    TranslationOutOfBounds,
    #[error("shift is not a lattice vector")]
    NonLatticeShift,
    #[error("cannot place excess mass")]
    CannotPlaceExcessMass,
    #[error("singular point")]
    SingularPoint,
    #[error("insufficient smoothness data")]
    InsufficientSmoothness,
    #[error("representation requires essential convexity")]
    RepresentationRequiresConvexity,
    #[error("zero frequency excluded")]
    ZeroFrequency,
    #[error("kernel not locally integrable")]
    NotLocallyIntegrable,
    #[error("incompatible grids")]
    IncompatibleGrids,
    #[error("empty S")]
    EmptyS,
    #[error("bad initialization")]
    BadInitialization,
    #[error("empty σ")]
    EmptySigma,
    #[error("diffusion stencil leaves grid")]
    DiffusionLeavesGrid,
    #[error("degenerate interpolation")]
    DegenerateInterpolation,
    #[error("candidate infeasible")]
    CandidateInfeasible,
    #[error("shifted candidate leaves the grid; enlarge grid")]
    EnlargeGrid,
    #[error("scenario requires superharmonic kernel")]
    RequiresSuperharmonic,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
