//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by the geometry, metric, and symbolic routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite component in input")]
    NonFinite,

    #[error("linear part is numerically singular (condition estimate {cond:.3e})")]
    SingularMap { cond: f64 },

    #[error("point lies outside the open set")]
    OutsideDomain,

    #[error("zero vector where a direction is required")]
    ZeroVector,

    #[error("no boundary hit within search radius {r_max:.3e}; set is not C-proper along this line")]
    NoBoundaryHit { r_max: f64 },

    #[error("domain is not usable as a metric carrier: {reason}")]
    NotCProper { reason: &'static str },

    #[error("truncated body is empty within the requested ball")]
    EmptyTruncation,

    #[error("bracket inversion: lower {lower} > upper {upper} (quadrature or root-finding bug)")]
    BracketInversion { lower: f64, upper: f64 },

    #[error("point is not on the boundary (residual {residual:.3e})")]
    NotOnBoundary { residual: f64 },

    #[error("direction from the base point is tangentially trapped (epsilon {epsilon:.3e} <= 0)")]
    TangentiallyTrapped { epsilon: f64 },

    #[error("frame is ill-conditioned: tau_0 = {tau0:.3e} below threshold")]
    FrameConditioning { tau0: f64 },

    #[error("boundary search failed within budget at step {step}")]
    FrameSearchFailed { step: usize },

    #[error("frame normalization residual {residual:.3e} exceeds 1e-8")]
    FrameResidual { residual: f64 },

    #[error("blow-up step {n}: {source}")]
    BlowupStep { n: usize, source: Box<Error> },

    #[error("scaling profile violates the domination bound at |w| = {w}: f_n = {value} > {bound}")]
    ProfileDomination { w: f64, value: f64, bound: f64 },

    #[error("probe pair {probe} is not contained in the tail of the domain sequence")]
    ProbeEscapes { probe: usize },

    #[error("polynomial is not Hermitian-symmetric: term alpha={alpha:?} beta={beta:?}")]
    NotHermitian { alpha: Vec<u32>, beta: Vec<u32> },

    #[error("polynomial has a nonzero constant term")]
    ConstantTerm,

    #[error("coordinates are not adapted: direction of filtration level {level} has degree {got}, expected {expected}")]
    NotAdapted { level: usize, got: u32, expected: u32 },

    #[error("polynomial is degenerate: vanishes identically on an affine line")]
    DegeneratePolynomial,

    #[error("polynomial failed the convexity probe at a sampled point")]
    NotConvex,

    #[error("polynomial failed the nonnegativity probe at a sampled point")]
    NotNonnegative,

    #[error("term alpha={alpha:?} beta={beta:?} has weight {omega} > 1")]
    WeightExceedsOne {
        alpha: Vec<u32>,
        beta: Vec<u32>,
        omega: String,
    },

    #[error("no interior sample found in the requested region")]
    NoInteriorSample,

    #[error("empty sample request")]
    EmptySample,

    #[error("invalid rational literal {literal:?}")]
    BadRational { literal: String },

    #[error("domain specification is invalid: {reason}")]
    BadSpec { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
