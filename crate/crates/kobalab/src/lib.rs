//! Numerical and symbolic laboratory for the Kobayashi metric on convex
//! domains in C^d.
//!
//! The crate brackets Kobayashi distances between certified lower and upper
//! bounds, estimates Gromov hyperbolicity constants through the four-point
//! condition, builds quasi-geodesics and fat-triangle non-hyperbolicity
//! witnesses, runs affine blow-ups at boundary points with local-Hausdorff
//! convergence monitoring, and computes multi-type decompositions of
//! Hermitian polynomials in exact rational arithmetic.
//!
//! Floating-point kernels are generic over [`scalar::Real`] (`f32`/`f64`);
//! the aliases below fix `f64`, which is what the CLI uses. The symbolic
//! polynomial layer always computes over arbitrary-precision rationals.

// `!(x > 0)` style guards are NaN-aware on purpose; matrix kernels index.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod complex;
pub mod domain;
pub mod error;
pub mod finite_type;
pub mod hausdorff;
pub mod hyperbolicity;
pub mod kobayashi;
pub mod linalg;
pub mod opt;
pub mod params;
pub mod poly;
pub mod rescaling;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};

/// `f64` instantiations of the generic core.
pub type Cplx64 = num_complex::Complex<f64>;
pub type CVector64 = complex::CVector<f64>;
pub type CMatrix64 = linalg::CMatrix<f64>;
pub type AffineMap64 = linalg::AffineMap<f64>;
pub type Domain64 = domain::Domain<f64>;
