//! Numerical laboratory for singular integral operators in mixed
//! radial-angular Lebesgue norms with power weights.
//!
//! The crate provides:
//!
//! - [`grid`]: polar (log-radial x sphere) and Cartesian discretizations of
//!   R^2 and R^3, sampling, resampling, and field serialization;
//! - [`norms`]: the mixed norms `L^p_{|x|} L^ptilde_theta` with `|x|^alpha`
//!   power weights, their scaling laws and truncation diagnostics;
//! - [`operators`]: Calderón–Zygmund kernels (the directional Riesz family
//!   canonically), condition checks, the FFT multiplier path and the
//!   truncated principal-value quadrature that cross-checks it;
//! - [`stein_weiss`]: the weight-commutator kernel, its sphere-integral
//!   asymptotics, the radial profile g, and the three-piece split whose
//!   convergence reproduces the sharp weight range `-n/p < alpha < n - n/p`.
//!
//! Everything numeric is generic over the scalar type via [`Scalar`]
//! (f32 or f64); the aliases below fix the f64 instantiations the CLI and
//! most tests use.

// Validation guards use `!(x > y)` on purpose: unlike `x <= y`, the negated
// form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
mod fft;
pub mod fit;
pub mod grid;
pub mod norms;
pub mod operators;
pub mod point;
pub mod quad;
pub mod scalar;
pub mod stein_weiss;

pub use error::CoreError;
pub use scalar::Scalar;

/// Working precision of the CLI and the acceptance suite.
pub type Real = f64;

pub type PolarGrid64 = grid::PolarGrid<Real>;
pub type CartesianGrid64 = grid::CartesianGrid<Real>;
pub type PolarField64 = grid::PolarField<Real>;
pub type CartesianField64 = grid::CartesianField<Real>;
pub type NormParams64 = norms::NormParams<Real>;
pub type KernelSpec64 = operators::KernelSpec<Real>;
pub type SteinWeissParams64 = stein_weiss::SteinWeissParams<Real>;
pub type SplitReport64 = stein_weiss::SplitReport<Real>;
