//! Application and dense assembly of the quadrature operator.

use crate::error::{Error, Result};
use crate::linalg::{rel_frobenius_asymmetry, symmetrize, BandCholesky, SymBandMatrix};
use crate::quadrature::SincScheme;
use ndarray::{Array2, ArrayViewMut2, Axis};
use rayon::prelude::*;

/// Default cap on one dense allocation: 4 GiB.
pub const DEFAULT_MEMORY_CAP: usize = 4 << 30;

/// Columns per parallel task during dense assembly. Fixed so the result does
/// not depend on thread count.
const COL_CHUNK: usize = 256;

/// Relative Frobenius asymmetry tolerated in the assembled operator before
/// symmetrisation; each summand is an inverse of a symmetric matrix, so
/// anything past roundoff signals a bug.
const ASYMMETRY_TOL: f64 = 1e-12;

/// Shifted matrix and weight for quadrature node `idx`, arranged so that all
/// exponentials stay bounded by one:
///
/// * `y <= 0`: solve `(M + e^(2y) K) x = b`, weight `w e^(2 beta y)`;
/// * `y > 0`: solve `(e^(-2y) M + K) x = b`, weight `w e^(2 (beta-1) y)`,
///
/// with `K = kappa^2 M + S` and prefactor `w`. For large positive `y` the
/// factor `e^(-2y)` underflows to zero and the summand degenerates smoothly
/// to a weighted `K`-solve.
fn node_weight(scheme: &SincScheme, idx: usize) -> f64 {
    let y = scheme.node(idx);
    let beta = scheme.beta();
    let pre = scheme.prefactor();
    if y <= 0.0 {
        pre * (2.0 * beta * y).exp()
    } else {
        pre * (2.0 * (beta - 1.0) * y).exp()
    }
}

fn node_matrix(
    mass: &SymBandMatrix,
    shifted: &SymBandMatrix,
    scheme: &SincScheme,
    idx: usize,
) -> SymBandMatrix {
    let y = scheme.node(idx);
    if y <= 0.0 {
        SymBandMatrix::linear_comb(1.0, mass, (2.0 * y).exp(), shifted)
    } else {
        SymBandMatrix::linear_comb((-2.0 * y).exp(), mass, 1.0, shifted)
    }
}

/// The quadrature approximation of `L_h^(-beta) M^(-1)`-type solves kept in
/// factored form: one band Cholesky factor per node, applied matrix-free.
///
/// `apply` maps a load vector `b` to the coefficient vector of the sampled
/// field, summing the weighted node solves in ascending node order.
pub struct FractionalOperator {
    dim: usize,
    weights: Vec<f64>,
    factors: Vec<BandCholesky>,
}

impl FractionalOperator {
    /// Factors every shifted system of the scheme. Factorisations are
    /// independent and run in parallel; their order is preserved.
    pub fn factorize(
        mass: &SymBandMatrix,
        shifted: &SymBandMatrix,
        scheme: &SincScheme,
    ) -> Result<Self> {
        check_pair(mass, shifted)?;
        let count = scheme.node_count();
        let weights: Vec<f64> = (0..count).map(|idx| node_weight(scheme, idx)).collect();
        let factors: Vec<Result<BandCholesky>> = (0..count)
            .into_par_iter()
            .map(|idx| BandCholesky::factor(&node_matrix(mass, shifted, scheme, idx)))
            .collect();
        let factors = factors.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(FractionalOperator { dim: mass.dim(), weights, factors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.factors.len()
    }

    /// `sum of w_l A_l^(-1) b` over nodes in ascending order.
    pub fn apply(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "load length {} does not match operator dimension {}",
                b.len(),
                self.dim
            )));
        }
        let mut acc = vec![0.0; self.dim];
        let mut work = vec![0.0; self.dim];
        for (w, f) in self.weights.iter().zip(&self.factors) {
            work.copy_from_slice(b);
            f.solve_in_place(&mut work);
            for (a, x) in acc.iter_mut().zip(&work) {
                *a += w * x;
            }
        }
        Ok(acc)
    }
}

/// Dense assembly of the quadrature operator `Q`, one shifted factorisation
/// at a time: node `l` adds `w_l A_l^(-1)` column block by column block.
///
/// The result is symmetrised after an asymmetry check; `memory_cap` bounds
/// the size of the dense allocation in bytes.
pub fn assemble_q(
    mass: &SymBandMatrix,
    shifted: &SymBandMatrix,
    scheme: &SincScheme,
    memory_cap: usize,
) -> Result<Array2<f64>> {
    check_pair(mass, shifted)?;
    let n = mass.dim();
    let required = n * n * std::mem::size_of::<f64>();
    if required > memory_cap {
        return Err(Error::MemoryCap { dim: n, required, cap: memory_cap });
    }
    let mut q = Array2::zeros((n, n));
    for idx in 0..scheme.node_count() {
        let a = node_matrix(mass, shifted, scheme, idx);
        let w = node_weight(scheme, idx);
        let factor = BandCholesky::factor(&a)?;
        let mut chunks: Vec<(usize, ArrayViewMut2<f64>)> =
            q.axis_chunks_iter_mut(Axis(1), COL_CHUNK).enumerate().collect();
        chunks.par_iter_mut().for_each(|(ci, qc)| {
            let j0 = *ci * COL_CHUNK;
            let w_cols = qc.ncols();
            let mut rhs = vec![0.0; n * w_cols];
            for t in 0..w_cols {
                rhs[(j0 + t) * w_cols + t] = 1.0;
            }
            factor.solve_columns_in_place(&mut rhs, w_cols);
            for (i, mut row) in qc.rows_mut().into_iter().enumerate() {
                let src = &rhs[i * w_cols..(i + 1) * w_cols];
                for (dst, &v) in row.iter_mut().zip(src) {
                    *dst += w * v;
                }
            }
        });
    }
    let defect = rel_frobenius_asymmetry(&q);
    if defect > ASYMMETRY_TOL {
        return Err(Error::Asymmetric(defect));
    }
    symmetrize(&mut q);
    Ok(q)
}

fn check_pair(mass: &SymBandMatrix, shifted: &SymBandMatrix) -> Result<()> {
    if mass.dim() != shifted.dim() || mass.half_bandwidth() != shifted.half_bandwidth() {
        return Err(Error::ShapeMismatch(format!(
            "mass is {}x{} with bandwidth {}, shifted operator {}x{} with bandwidth {}",
            mass.dim(),
            mass.dim(),
            mass.half_bandwidth(),
            shifted.dim(),
            shifted.dim(),
            shifted.half_bandwidth()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_mass, assemble_stiffness, UniformMesh};
    use crate::quadrature::SincScheme;

    fn setup(d: usize, n: usize, kappa: f64) -> (SymBandMatrix, SymBandMatrix) {
        let mesh = UniformMesh::new(d, n).unwrap();
        let m = assemble_mass(&mesh);
        let s = assemble_stiffness(&mesh);
        let k = SymBandMatrix::linear_comb(kappa * kappa, &m, 1.0, &s);
        (m, k)
    }

    #[test]
    fn dense_and_factored_forms_agree() {
        let (m, k) = setup(1, 31, 0.5);
        let scheme = SincScheme::new(0.75, 0.3).unwrap();
        let q = assemble_q(&m, &k, &scheme, DEFAULT_MEMORY_CAP).unwrap();
        let op = FractionalOperator::factorize(&m, &k, &scheme).unwrap();
        let b: Vec<f64> = (0..31).map(|i| ((i as f64) * 0.7).sin()).collect();
        let via_op = op.apply(&b).unwrap();
        let bd = ndarray::arr1(&b);
        let via_q = q.dot(&bd);
        for i in 0..31 {
            assert!(
                (via_op[i] - via_q[i]).abs() < 1e-12,
                "component {i}: {} vs {}",
                via_op[i],
                via_q[i]
            );
        }
    }

    #[test]
    fn assembly_is_deterministic_and_symmetric() {
        let (m, k) = setup(2, 7, 0.5);
        let scheme = SincScheme::new(0.6, 0.35).unwrap();
        let q1 = assemble_q(&m, &k, &scheme, DEFAULT_MEMORY_CAP).unwrap();
        let q2 = assemble_q(&m, &k, &scheme, DEFAULT_MEMORY_CAP).unwrap();
        assert_eq!(q1, q2, "repeated assembly must be bitwise identical");
        assert_eq!(rel_frobenius_asymmetry(&q1), 0.0);
    }

    #[test]
    fn memory_cap_refuses_large_dense_blocks() {
        let (m, k) = setup(1, 63, 0.5);
        let scheme = SincScheme::new(0.5, 0.3).unwrap();
        match assemble_q(&m, &k, &scheme, 1000) {
            Err(Error::MemoryCap { dim, required, cap }) => {
                assert_eq!(dim, 63);
                assert_eq!(required, 63 * 63 * 8);
                assert_eq!(cap, 1000);
            }
            other => panic!("expected MemoryCap, got {other:?}"),
        }
    }

    #[test]
    fn extreme_parameters_stay_finite() {
        // beta close to one with a tiny step drives the largest node to
        // y ~ pi^2/(4 (1-beta) k): the overflow-safe split must keep every
        // weight and solve finite.
        let (m, k) = setup(1, 7, 1.0);
        let step = 0.05;
        let scheme = SincScheme::new(0.9, step).unwrap();
        assert!(scheme.k_plus() > 5000);
        let op = FractionalOperator::factorize(&m, &k, &scheme).unwrap();
        let b = vec![1.0; 7];
        let out = op.apply(&b).unwrap();
        assert!(out.iter().all(|v| v.is_finite()));
        assert!(out.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn mismatched_operands_are_rejected() {
        let (m, _) = setup(1, 7, 0.5);
        let (_, k) = setup(1, 15, 0.5);
        let scheme = SincScheme::new(0.5, 0.3).unwrap();
        assert!(matches!(
            assemble_q(&m, &k, &scheme, DEFAULT_MEMORY_CAP),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
