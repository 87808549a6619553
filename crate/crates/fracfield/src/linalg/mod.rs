//! Dense and banded linear algebra used by assembly, solvers, and studies.

mod band;
mod dense;

pub use band::{BandCholesky, SymBandMatrix};
pub use dense::{dense_times_band, par_matmul, rel_frobenius_asymmetry, symmetrize};
