//! Dense helpers: threaded matrix products and symmetry utilities.
//!
//! Determinism matters more than peak speed here: reproducibility across
//! `--threads` settings is a hard requirement, so every parallel product is
//! split into fixed-size row chunks whose per-row arithmetic is identical to
//! the serial computation. Thread count only changes scheduling.

use crate::linalg::SymBandMatrix;
use ndarray::parallel::prelude::*;
use ndarray::{Array2, ArrayView2, Axis};

/// Rows per parallel task. Fixed so results do not depend on thread count.
const ROW_CHUNK: usize = 64;

/// `A B` computed in parallel over row chunks of `A`.
pub fn par_matmul(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions must agree");
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    out.axis_chunks_iter_mut(Axis(0), ROW_CHUNK)
        .into_par_iter()
        .zip(a.axis_chunks_iter(Axis(0), ROW_CHUNK).into_par_iter())
        .for_each(|(mut oc, ac)| oc.assign(&ac.dot(&b)));
    out
}

/// `Q M` for symmetric banded `M`: row `r` of the product is `M q_r` with
/// `q_r` the `r`-th row of `Q`. Parallel over fixed row chunks.
pub fn dense_times_band(q: &Array2<f64>, m: &SymBandMatrix) -> Array2<f64> {
    assert_eq!(q.ncols(), m.dim(), "inner dimensions must agree");
    let mut out = Array2::zeros((q.nrows(), m.dim()));
    out.axis_chunks_iter_mut(Axis(0), ROW_CHUNK)
        .into_par_iter()
        .zip(q.axis_chunks_iter(Axis(0), ROW_CHUNK).into_par_iter())
        .for_each(|(mut oc, qc)| {
            let mut row_in = vec![0.0; m.dim()];
            let mut row_out = vec![0.0; m.dim()];
            for (mut or, qr) in oc.rows_mut().into_iter().zip(qc.rows()) {
                for (dst, src) in row_in.iter_mut().zip(qr.iter()) {
                    *dst = *src;
                }
                m.matvec(&row_in, &mut row_out);
                for (dst, src) in or.iter_mut().zip(&row_out) {
                    *dst = *src;
                }
            }
        });
    out
}

/// `||A - A^T||_F / ||A||_F`, or zero for the zero matrix.
pub fn rel_frobenius_asymmetry(a: &Array2<f64>) -> f64 {
    assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
    let mut defect = 0.0;
    let mut norm = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let v = a[[i, j]];
            norm += v * v;
            if j > i {
                let d = v - a[[j, i]];
                defect += 2.0 * d * d;
            }
        }
    }
    if norm == 0.0 {
        0.0
    } else {
        (defect / norm).sqrt()
    }
}

/// Replaces `A` with `(A + A^T) / 2`.
pub fn symmetrize(a: &mut Array2<f64>) {
    assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = avg;
            a[[j, i]] = avg;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn par_matmul_matches_serial_dot() {
        let n = 130; // spans multiple row chunks
        let a = Array2::from_shape_fn((n, n), |(i, j)| ((i * 31 + j * 17) as f64).sin());
        let b = Array2::from_shape_fn((n, n), |(i, j)| ((i + 2 * j) as f64).cos());
        let par = par_matmul(a.view(), b.view());
        let serial = a.dot(&b);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((par[[i, j]] - serial[[i, j]]).abs());
            }
        }
        // Chunked rows use the same per-row arithmetic as .dot on the full
        // matrix only up to blocking differences; allow roundoff slack.
        assert!(worst < 1e-12, "worst deviation {worst:e}");
    }

    #[test]
    fn dense_times_band_matches_dense_product() {
        let n = 20;
        let mut m = SymBandMatrix::new(n, 2);
        for i in 0..n {
            m.add(i, i, 3.0 + i as f64 * 0.1);
            if i > 0 {
                m.add(i, i - 1, -0.5);
            }
            if i > 1 {
                m.add(i, i - 2, 0.25);
            }
        }
        let q = Array2::from_shape_fn((n, n), |(i, j)| ((i * 7 + j) as f64).sin());
        let got = dense_times_band(&q, &m);
        let want = q.dot(&m.to_dense());
        for i in 0..n {
            for j in 0..n {
                assert!((got[[i, j]] - want[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn asymmetry_and_symmetrize() {
        let mut a = arr2(&[[1.0, 2.0], [4.0, 3.0]]);
        let defect = rel_frobenius_asymmetry(&a);
        let expect = (2.0 * 4.0f64) / (1.0 + 4.0 + 16.0 + 9.0f64);
        assert!((defect - expect.sqrt()).abs() < 1e-15);
        symmetrize(&mut a);
        assert_eq!(a[[0, 1]], 3.0);
        assert_eq!(a[[1, 0]], 3.0);
        assert_eq!(rel_frobenius_asymmetry(&a), 0.0);
    }
}
