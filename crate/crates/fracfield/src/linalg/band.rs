//! Symmetric banded matrices and their Cholesky factorisation.
//!
//! The finite element mass and stiffness matrices on a uniform mesh are
//! symmetric with a small, mesh-independent number of bands, and a Cholesky
//! factor of such a matrix fills in nothing outside the band. Storing the
//! lower band row-major keeps assembly, factorisation, and triangular solves
//! cache friendly at O(n * bandwidth) memory.

use crate::error::{Error, Result};
use ndarray::Array2;

/// Symmetric matrix stored as its lower band, row-major.
///
/// Entry `(i, j)` with `j <= i` and `i - j <= half_bandwidth` lives at
/// `band[i * (half_bandwidth + 1) + half_bandwidth - (i - j)]`; everything
/// further from the diagonal is an implicit zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBandMatrix {
    dim: usize,
    half_bandwidth: usize,
    band: Vec<f64>,
}

impl SymBandMatrix {
    /// Zero matrix of the given size and half bandwidth.
    pub fn new(dim: usize, half_bandwidth: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        SymBandMatrix {
            dim,
            half_bandwidth,
            band: vec![0.0; dim * (half_bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> usize {
        debug_assert!(col <= row && row - col <= self.half_bandwidth);
        row * (self.half_bandwidth + 1) + self.half_bandwidth - (row - col)
    }

    /// Entry `(i, j)`; zero outside the band. Symmetric in its arguments.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim, "index out of range");
        let (row, col) = if i >= j { (i, j) } else { (j, i) };
        if row - col > self.half_bandwidth {
            0.0
        } else {
            self.band[self.slot(row, col)]
        }
    }

    /// Adds `value` to entry `(i, j)` (and by symmetry `(j, i)`).
    ///
    /// Panics if the entry lies outside the band: assembly code chooses the
    /// bandwidth up front, so an out-of-band write is a logic error.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.dim && j < self.dim, "index out of range");
        let (row, col) = if i >= j { (i, j) } else { (j, i) };
        assert!(
            row - col <= self.half_bandwidth,
            "entry ({i}, {j}) outside half bandwidth {}",
            self.half_bandwidth
        );
        let s = self.slot(row, col);
        self.band[s] += value;
    }

    /// `ca * a + cb * b` for operands with identical layout.
    pub fn linear_comb(ca: f64, a: &SymBandMatrix, cb: f64, b: &SymBandMatrix) -> SymBandMatrix {
        assert_eq!(a.dim, b.dim, "dimension mismatch");
        assert_eq!(a.half_bandwidth, b.half_bandwidth, "bandwidth mismatch");
        let band = a
            .band
            .iter()
            .zip(&b.band)
            .map(|(&x, &y)| ca * x + cb * y)
            .collect();
        SymBandMatrix { dim: a.dim, half_bandwidth: a.half_bandwidth, band }
    }

    /// `y = A x`. Row sweep in ascending index order, so the result is
    /// independent of threading decisions made by callers.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let h = self.half_bandwidth;
        for i in 0..self.dim {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(self.dim);
            let mut acc = 0.0;
            for j in lo..hi {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.dim];
        self.matvec(x, &mut ax);
        x.iter().zip(&ax).map(|(&a, &b)| a * b).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.band.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Largest entry-wise difference `|A - B|` over the band union.
    pub fn max_abs_diff(&self, other: &SymBandMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let h = self.half_bandwidth.max(other.half_bandwidth);
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i.saturating_sub(h)..=i {
                worst = worst.max((self.get(i, j) - other.get(i, j)).abs());
            }
        }
        worst
    }

    /// Dense copy, for oracles and small-scale checks.
    pub fn to_dense(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.dim, self.dim), |(i, j)| self.get(i, j))
    }

    /// Writes non-zero entries as `row col value` lines, row-major over the
    /// full symmetric matrix. Intended for debug dumps.
    pub fn write_coordinate<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        let h = self.half_bandwidth;
        for i in 0..self.dim {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(self.dim);
            for j in lo..hi {
                let v = self.get(i, j);
                if v != 0.0 {
                    writeln!(w, "{i} {j} {v:e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Lower Cholesky factor of a positive definite [`SymBandMatrix`], in the
/// same band layout. `A = L L^T` with no fill outside the band.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    dim: usize,
    half_bandwidth: usize,
    band: Vec<f64>,
}

impl BandCholesky {
    /// Factors `a`; fails with the offending pivot if `a` is not positive
    /// definite.
    pub fn factor(a: &SymBandMatrix) -> Result<Self> {
        let n = a.dim;
        let h = a.half_bandwidth;
        let mut l = SymBandMatrix::new(n, h);
        for j in 0..n {
            let lo_j = j.saturating_sub(h);
            let mut s = a.get(j, j);
            for k in lo_j..j {
                let v = l.band[l.slot(j, k)];
                s -= v * v;
            }
            if s <= 0.0 || !s.is_finite() {
                return Err(Error::NotPositiveDefinite { index: j, pivot: s });
            }
            let d = s.sqrt();
            let sj = l.slot(j, j);
            l.band[sj] = d;
            for i in (j + 1)..(j + h + 1).min(n) {
                let lo = i.saturating_sub(h).max(lo_j);
                let mut t = a.get(i, j);
                for k in lo..j {
                    t -= l.band[l.slot(i, k)] * l.band[l.slot(j, k)];
                }
                let si = l.slot(i, j);
                l.band[si] = t / d;
            }
        }
        Ok(BandCholesky { dim: n, half_bandwidth: h, band: l.band })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> usize {
        row * (self.half_bandwidth + 1) + self.half_bandwidth - (row - col)
    }

    #[inline]
    fn entry(&self, row: usize, col: usize) -> f64 {
        self.band[self.slot(row, col)]
    }

    /// Solves `A x = b` in place for a single right-hand side.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        let h = self.half_bandwidth;
        for i in 0..self.dim {
            let lo = i.saturating_sub(h);
            let mut v = x[i];
            for k in lo..i {
                v -= self.entry(i, k) * x[k];
            }
            x[i] = v / self.entry(i, i);
        }
        for i in (0..self.dim).rev() {
            let hi = (i + h + 1).min(self.dim);
            let mut v = x[i];
            for k in (i + 1)..hi {
                v -= self.entry(k, i) * x[k];
            }
            x[i] = v / self.entry(i, i);
        }
    }

    /// Solves `A X = B` in place for `ncols` right-hand sides stored row-major
    /// as a `dim x ncols` block. The sweeps run over rows, so the arithmetic
    /// per column is identical to [`Self::solve_in_place`].
    pub fn solve_columns_in_place(&self, x: &mut [f64], ncols: usize) {
        assert_eq!(x.len(), self.dim * ncols);
        let h = self.half_bandwidth;
        for i in 0..self.dim {
            let (head, tail) = x.split_at_mut(i * ncols);
            let row_i = &mut tail[..ncols];
            let lo = i.saturating_sub(h);
            for k in lo..i {
                axpy(-self.entry(i, k), &head[k * ncols..(k + 1) * ncols], row_i);
            }
            let d = self.entry(i, i);
            for v in row_i.iter_mut() {
                *v /= d;
            }
        }
        for i in (0..self.dim).rev() {
            let (head, tail) = x.split_at_mut((i + 1) * ncols);
            let row_i = &mut head[i * ncols..];
            let hi = (i + h + 1).min(self.dim);
            for k in (i + 1)..hi {
                let off = (k - i - 1) * ncols;
                axpy(-self.entry(k, i), &tail[off..off + ncols], row_i);
            }
            let d = self.entry(i, i);
            for v in row_i.iter_mut() {
                *v /= d;
            }
        }
    }

    /// `y = L z`: maps iid standard normals to a vector with covariance `A`.
    pub fn factor_times(&self, z: &[f64], y: &mut [f64]) {
        assert_eq!(z.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let h = self.half_bandwidth;
        for i in 0..self.dim {
            let lo = i.saturating_sub(h);
            let mut acc = 0.0;
            for k in lo..=i {
                acc += self.entry(i, k) * z[k];
            }
            y[i] = acc;
        }
    }

    /// `max_ij |(L L^T - A)_ij|`; the factorisation is exact up to roundoff,
    /// so this should sit at machine precision relative to `A`.
    pub fn max_reconstruction_error(&self, a: &SymBandMatrix) -> f64 {
        assert_eq!(a.dim(), self.dim);
        let h = self.half_bandwidth;
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            let lo_i = i.saturating_sub(h);
            for j in lo_i..=i {
                let lo = j.saturating_sub(h).max(lo_i);
                let mut s = 0.0;
                for k in lo..=j {
                    s += self.entry(i, k) * self.entry(j, k);
                }
                worst = worst.max((s - a.get(i, j)).abs());
            }
        }
        worst
    }
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
