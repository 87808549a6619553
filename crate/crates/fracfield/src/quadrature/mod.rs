//! Sinc quadrature of the discrete fractional inverse.
//!
//! The negative fractional power of the discrete operator
//! `L_h = kappa^2 I + (discrete Dirichlet Laplacian)` is represented through
//! the Balakrishnan integral, discretised with step `k` on the exponentially
//! transformed axis:
//!
//! ```text
//! L_h^(-beta) ~ (2 k sin(pi beta) / pi) *
//!     sum over l in [-K-, K+] of e^(2 beta y_l) (I + e^(2 y_l) L_h)^(-1),
//!     y_l = l k,
//! K- = ceil(pi^2 / (4 beta k^2)),    K+ = ceil(pi^2 / (4 (1 - beta) k^2)).
//! ```
//!
//! In finite element form every summand is a shifted solve with the matrix
//! `M + e^(2 y) (kappa^2 M + S)`; for positive nodes both sides are scaled by
//! `e^(-2 y)` so that no exponential ever overflows. The total quadrature
//! error decays like `exp(-pi^2 / (2 k))` uniformly over the spectrum.

mod operator;
mod oracle;

pub use operator::{assemble_q, FractionalOperator, DEFAULT_MEMORY_CAP};
pub use oracle::{SpectralOracle, ORACLE_MAX_DIM};

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Rule for choosing the quadrature step from the mesh size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Calibration {
    /// `k = -1 / (beta ln h)`: the step used in the simulation study.
    Experiment,
    /// `k = pi^2 / (2 rho |ln h|)`: balances the quadrature error against a
    /// weak convergence rate `rho` in `h`.
    WeakTheory { rho: f64 },
}

/// Quadrature step for mesh size `h` in `(0, 1)` and exponent `beta` in
/// `(0, 1)`.
pub fn calibrate_k(h: f64, beta: f64, calibration: Calibration) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidMeshSize(h));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidBeta(beta));
    }
    match calibration {
        Calibration::Experiment => Ok(-1.0 / (beta * h.ln())),
        Calibration::WeakTheory { rho } => {
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(Error::NotPositive { name: "rho", value: rho });
            }
            Ok(PI * PI / (2.0 * rho * h.ln().abs()))
        }
    }
}

/// Weak convergence rate in `h` predicted by theory for functionals of the
/// field: with `alpha = 2/d`,
/// `rho = d alpha beta` while `alpha beta < 1` and `d (2 alpha beta - 1)`
/// beyond (the two branches agree at `alpha beta = 1`).
pub fn weak_theory_rho(dimension: usize, beta: f64) -> Result<f64> {
    if dimension != 1 && dimension != 2 {
        return Err(Error::InvalidDimension(dimension));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidBeta(beta));
    }
    let d = dimension as f64;
    let alpha = 2.0 / d;
    let ab = alpha * beta;
    Ok(if ab < 1.0 { d * ab } else { d * (2.0 * ab - 1.0) })
}

/// Symmetric-exponential sinc quadrature scheme for one `(beta, k)` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SincScheme {
    beta: f64,
    step: f64,
    k_minus: usize,
    k_plus: usize,
}

impl SincScheme {
    /// Truncation indices from the step: `K- = ceil(pi^2 / (4 beta k^2))`,
    /// `K+ = ceil(pi^2 / (4 (1-beta) k^2))`.
    pub fn new(beta: f64, step: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidBeta(beta));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::NotPositive { name: "quadrature step", value: step });
        }
        let k_minus = (PI * PI / (4.0 * beta * step * step)).ceil() as usize;
        let k_plus = (PI * PI / (4.0 * (1.0 - beta) * step * step)).ceil() as usize;
        Ok(SincScheme { beta, step, k_minus, k_plus })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn k_minus(&self) -> usize {
        self.k_minus
    }

    pub fn k_plus(&self) -> usize {
        self.k_plus
    }

    /// Number of quadrature nodes, `K- + K+ + 1`.
    pub fn node_count(&self) -> usize {
        self.k_minus + self.k_plus + 1
    }

    /// Signed node index `l` in `[-K-, K+]` for flat index `idx`.
    pub fn signed_index(&self, idx: usize) -> i64 {
        debug_assert!(idx < self.node_count());
        idx as i64 - self.k_minus as i64
    }

    /// Node position `y_l = l k`.
    pub fn node(&self, idx: usize) -> f64 {
        self.signed_index(idx) as f64 * self.step
    }

    /// Common weight factor `2 k sin(pi beta) / pi`.
    pub fn prefactor(&self) -> f64 {
        2.0 * self.step * (PI * self.beta).sin() / PI
    }

    /// A priori bound `exp(-pi^2 / (2 k))` on the relative quadrature error
    /// (up to a constant depending on `beta` and the smallest eigenvalue).
    pub fn error_scale(&self) -> f64 {
        (-PI * PI / (2.0 * self.step)).exp()
    }
}
