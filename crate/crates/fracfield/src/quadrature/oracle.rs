//! Eigendecomposition oracle for the discrete fractional inverse.
//!
//! The generalised problem `K v = lambda M v` is reduced with the Cholesky
//! factor of `M` to an ordinary symmetric problem and solved densely. The
//! resulting `M`-orthonormal basis gives the exact discrete fractional
//! inverse `V diag(lambda^(-beta)) V^T`, against which the sinc quadrature
//! operator is validated. Dense `O(n^3)` work caps the usable size.

use crate::error::{Error, Result};
use crate::linalg::SymBandMatrix;
use nalgebra::DMatrix;
use ndarray::Array2;

/// Largest system the oracle accepts; beyond this the dense decomposition is
/// slower than anything it could validate.
pub const ORACLE_MAX_DIM: usize = 4096;

/// Exact spectral representation of the discrete operator pair `(M, K)`.
pub struct SpectralOracle {
    eigenvalues: Vec<f64>,
    /// Columns are `M`-orthonormal eigenvectors, ascending eigenvalue order.
    vectors: Array2<f64>,
}

impl SpectralOracle {
    pub fn new(mass: &SymBandMatrix, shifted: &SymBandMatrix) -> Result<Self> {
        let n = mass.dim();
        if n != shifted.dim() {
            return Err(Error::ShapeMismatch(format!(
                "mass dimension {} does not match operator dimension {}",
                n,
                shifted.dim()
            )));
        }
        if n > ORACLE_MAX_DIM {
            return Err(Error::OracleTooLarge { got: n, max: ORACLE_MAX_DIM });
        }
        let m_dense = DMatrix::from_fn(n, n, |i, j| mass.get(i, j));
        let k_dense = DMatrix::from_fn(n, n, |i, j| shifted.get(i, j));
        let chol = m_dense
            .cholesky()
            .ok_or(Error::NotPositiveDefinite { index: 0, pivot: f64::NAN })?;
        let l = chol.l();
        // A = L^-1 K L^-T is symmetric with the same eigenvalues as (K, M).
        let x = l.solve_lower_triangular(&k_dense).ok_or(Error::EigenFailed)?;
        let a_t = l.solve_lower_triangular(&x.transpose()).ok_or(Error::EigenFailed)?;
        let mut a = a_t.transpose();
        // Exact symmetry helps the eigensolver; the defect is pure roundoff.
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = avg;
                a[(j, i)] = avg;
            }
        }
        let eig = a.symmetric_eigen();
        // Back-transform W to M-orthonormal vectors V = L^-T W.
        let v = l
            .transpose()
            .solve_upper_triangular(&eig.eigenvectors)
            .ok_or(Error::EigenFailed)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[(r, order[c])]);
        Ok(SpectralOracle { eigenvalues, vectors })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Generalised eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `V diag(lambda^(-exponent)) V^T b`: the exact negative fractional
    /// power applied to a load. `exponent = 1` is a plain `K`-solve and
    /// `exponent = 0` an `M`-solve.
    pub fn apply_power(&self, exponent: f64, b: &[f64]) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&exponent) {
            return Err(Error::InvalidBeta(exponent));
        }
        let n = self.dim();
        if b.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "load length {} does not match oracle dimension {n}",
                b.len()
            )));
        }
        // c = V^T b, scaled by the eigenvalue powers, then out = V c.
        let mut coeffs = vec![0.0; n];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                acc += self.vectors[[i, j]] * b[i];
            }
            *c = acc * self.eigenvalues[j].powf(-exponent);
        }
        let mut out = vec![0.0; n];
        for j in 0..n {
            let cj = coeffs[j];
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.vectors[[i, j]] * cj;
            }
        }
        Ok(out)
    }

    /// Dense `V diag(lambda^(-exponent)) V^T`.
    pub fn power_matrix(&self, exponent: f64) -> Result<Array2<f64>> {
        if !(0.0..=1.0).contains(&exponent) {
            return Err(Error::InvalidBeta(exponent));
        }
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = self.eigenvalues[j].powf(-exponent);
            for i in 0..n {
                scaled[[i, j]] *= s;
            }
        }
        Ok(scaled.dot(&self.vectors.t()))
    }

    /// `max |V^T M V - I|`: how far the basis is from `M`-orthonormal.
    pub fn orthonormality_defect(&self, mass: &SymBandMatrix) -> f64 {
        let n = self.dim();
        let mut mv = Array2::zeros((n, n));
        let mut col = vec![0.0; n];
        let mut out = vec![0.0; n];
        for j in 0..n {
            for i in 0..n {
                col[i] = self.vectors[[i, j]];
            }
            mass.matvec(&col, &mut out);
            for i in 0..n {
                mv[[i, j]] = out[i];
            }
        }
        let gram = self.vectors.t().dot(&mv);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[[i, j]] - want).abs());
            }
        }
        worst
    }
}
