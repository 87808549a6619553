//! Gaussian random fields from fractional elliptic SPDEs.
//!
//! The field `u` on the unit interval or unit square solves
//!
//! ```text
//! (kappa^2 - Laplacian)^beta u = W,    u = 0 on the boundary,
//! ```
//!
//! with `W` Gaussian white noise and `beta` in `(0, 1)`. Samples are drawn by
//! discretising with piecewise linear finite elements on a uniform mesh and
//! applying a sinc quadrature approximation of the fractional inverse to a
//! white-noise load. The crate also carries the machinery to measure weak
//! convergence of functionals of `u` against a truncated spectral reference
//! solution, and to fit observed convergence rates.
//!
//! Modules build on each other roughly bottom-up:
//!
//! * [`linalg`]: symmetric banded matrices, band Cholesky, dense helpers.
//! * [`fem`]: uniform meshes, hat-function evaluation, mass and stiffness
//!   assembly (closed-form stencils plus an element-loop oracle).
//! * [`grid`]: tensor evaluation grids with trapezoidal quadrature.
//! * [`spectral`]: the exact eigenpairs of the shifted Dirichlet Laplacian,
//!   truncated variance series, and reference expectations of functionals.
//! * [`quadrature`]: sinc quadrature schemes and the discrete fractional
//!   inverse, either applied matrix-free or assembled densely, with an
//!   eigendecomposition oracle for validation.
//! * [`sampler`]: white-noise loads and field realisations.
//! * [`study`]: weak-error measurements over mesh hierarchies and rate fits.
//! * [`report`]: CSV and SVG artefacts with provenance headers.

// Numeric-kernel lint policy: negated float comparisons reject NaN on
// purpose, indexed loops mirror the stencil formulas they implement, and
// reference constants keep every digit of their source values.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::excessive_precision
)]

pub mod error;
pub mod fem;
pub mod grid;
pub mod linalg;
pub mod quadrature;
pub mod report;
pub mod sampler;
pub mod spectral;
pub mod study;

pub use error::{Error, Result};

/// Re-export of the array crate that appears throughout the public API.
pub use ndarray;

/// Crate version, recorded in artefact provenance headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
