//! Central knobs for the numerical routines.
//!
//! Everything that a search, quadrature, or sampler depends on lives here so
//! that tests and the CLI agree on one set of defaults.

/// Residual for boundary bisection: membership flips across a segment of at
/// most this length around a reported hit.
pub const BOUNDARY_RESIDUAL: f64 = 1e-10;

/// Rays are expanded geometrically up to this radius before a missing hit is
/// reported (possible only for sets that contain the whole line).
pub const RAY_R_MAX: f64 = 1e6;

/// Phase grid size when minimizing a ray hit over a complex line.
pub const PHASE_GRID: usize = 64;

/// Sampled directions for the generic closest-boundary-point search.
pub const CLOSEST_POINT_DIRECTIONS: usize = 256;

/// Default direction count for the support-sampling Hausdorff estimate.
pub const HAUSDORFF_DIRECTIONS: usize = 4096;

/// Hard cap when the Hausdorff estimate refines its grid.
pub const HAUSDORFF_DIRECTIONS_MAX: usize = 16384;

/// Condition-number threshold beyond which a linear map is treated as
/// singular instead of silently amplifying noise.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Simpson nodes per polyline segment (16 panels).
pub const SIMPSON_NODES: usize = 33;

/// Multiplicative guard folded into reported upper bounds to cover
/// quadrature error on smooth interior integrands.
pub const QUADRATURE_SAFETY: f64 = 1.01;

/// Interior node count for fresh geodesic polylines.
pub const PATH_NODES_INITIAL: usize = 8;

/// Node-doubling cap for geodesic polylines.
pub const PATH_NODES_MAX: usize = 64;

/// Relative improvement required to accept a node doubling.
pub const PATH_DOUBLING_GAIN: f64 = 0.01;

/// Default coordinate-descent sweeps for the path optimizer.
pub const PATH_DEFAULT_BUDGET: usize = 12;

/// Parameter grid used when verifying a quasi-geodesic certificate.
pub const QG_T_GRID_STEP: f64 = 0.25;
pub const QG_T_GRID_END: f64 = 4.0;

/// Grid size for the witness scan along the quasi-geodesic ray.
pub const WITNESS_T0_GRID: usize = 64;

/// Frames reject base points whose first boundary distance falls below this.
pub const FRAME_TAU_MIN: f64 = 1e-12;

/// Deepest boundary layer (2^-k) used by the m-convexity sampler.
pub const MCONVEX_MAX_LAYER: u32 = 14;

/// Random adapted-coordinate probes per filtration level.
pub const ADAPTED_PROBES: usize = 32;

/// Radius ladder (2^-4 .. 2^-16) for vanishing-order regression.
pub const LINE_TYPE_RHO_MIN_EXP: i32 = -16;
pub const LINE_TYPE_RHO_MAX_EXP: i32 = -4;
