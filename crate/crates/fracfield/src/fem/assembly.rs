//! Closed-form stencil assembly of mass and stiffness matrices.
//!
//! On a uniform mesh every interior node sees the same element neighbourhood,
//! so the assembled rows follow fixed stencils. Both matrices are stored with
//! the same half bandwidth per dimension (1 for the interval, `n + 1` for the
//! square) so that shifted combinations `a M + b S` can be formed entry-wise.

use crate::fem::UniformMesh;
use crate::linalg::SymBandMatrix;

fn half_bandwidth(mesh: &UniformMesh) -> usize {
    match mesh.dimension() {
        1 => 1,
        _ => mesh.interior_per_axis() + 1,
    }
}

/// Mass matrix `M` with entries `integral of phi_i phi_j`.
///
/// Interval stencil: `2h/3` on the diagonal, `h/6` between neighbours.
/// Square stencil: `h^2/2` on the diagonal and `h^2/12` towards the four axis
/// neighbours and the two neighbours along the split diagonal of the cells;
/// the anti-diagonal pair shares no element and stays zero.
pub fn assemble_mass(mesh: &UniformMesh) -> SymBandMatrix {
    let n = mesh.interior_per_axis();
    let h = mesh.grid_spacing();
    let mut m = SymBandMatrix::new(mesh.dof_count(), half_bandwidth(mesh));
    match mesh.dimension() {
        1 => {
            for i in 0..n {
                m.add(i, i, 2.0 * h / 3.0);
                if i > 0 {
                    m.add(i, i - 1, h / 6.0);
                }
            }
        }
        _ => {
            let diag = h * h / 2.0;
            let off = h * h / 12.0;
            for iy in 0..n {
                for ix in 0..n {
                    let k = iy * n + ix;
                    m.add(k, k, diag);
                    if ix > 0 {
                        m.add(k, k - 1, off);
                    }
                    if iy > 0 {
                        m.add(k, k - n, off);
                        if ix > 0 {
                            m.add(k, k - n - 1, off);
                        }
                    }
                }
            }
        }
    }
    m
}

/// Stiffness matrix `S` with entries `integral of grad phi_i . grad phi_j`.
///
/// Interval stencil: `2/h` on the diagonal, `-1/h` between neighbours.
/// Square stencil: the classical five-point values `4` and `-1` (the
/// right-triangle split cancels the diagonal coupling exactly).
pub fn assemble_stiffness(mesh: &UniformMesh) -> SymBandMatrix {
    let n = mesh.interior_per_axis();
    let h = mesh.grid_spacing();
    let mut s = SymBandMatrix::new(mesh.dof_count(), half_bandwidth(mesh));
    match mesh.dimension() {
        1 => {
            for i in 0..n {
                s.add(i, i, 2.0 / h);
                if i > 0 {
                    s.add(i, i - 1, -1.0 / h);
                }
            }
        }
        _ => {
            for iy in 0..n {
                for ix in 0..n {
                    let k = iy * n + ix;
                    s.add(k, k, 4.0);
                    if ix > 0 {
                        s.add(k, k - 1, -1.0);
                    }
                    if iy > 0 {
                        s.add(k, k - n, -1.0);
                    }
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn interval_stencil_values() {
        let mesh = UniformMesh::new(1, 3).unwrap();
        let m = assemble_mass(&mesh);
        let s = assemble_stiffness(&mesh);
        assert_abs_diff_eq!(m.get(1, 1), 1.0 / 6.0, epsilon = 1e-16);
        assert_abs_diff_eq!(m.get(1, 0), 1.0 / 24.0, epsilon = 1e-16);
        assert_eq!(m.get(2, 0), 0.0);
        assert_abs_diff_eq!(s.get(1, 1), 8.0, epsilon = 1e-13);
        assert_abs_diff_eq!(s.get(2, 1), -4.0, epsilon = 1e-13);
    }

    #[test]
    fn square_stencil_values() {
        let mesh = UniformMesh::new(2, 2).unwrap();
        let h2 = (1.0f64 / 3.0) * (1.0 / 3.0);
        let m = assemble_mass(&mesh);
        let s = assemble_stiffness(&mesh);
        assert_abs_diff_eq!(m.get(0, 0), h2 / 2.0, epsilon = 1e-16);
        assert_abs_diff_eq!(m.get(1, 0), h2 / 12.0, epsilon = 1e-16);
        assert_abs_diff_eq!(m.get(2, 0), h2 / 12.0, epsilon = 1e-16);
        // Node 3 = (1,1) couples to node 0 = (0,0) along the split diagonal.
        assert_abs_diff_eq!(m.get(3, 0), h2 / 12.0, epsilon = 1e-16);
        // Anti-diagonal pair (1,0)-(0,1) shares no element.
        assert_eq!(m.get(2, 1), 0.0);
        assert_abs_diff_eq!(s.get(0, 0), 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.get(1, 0), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.get(2, 0), -1.0, epsilon = 1e-15);
        assert_eq!(s.get(3, 0), 0.0);
        assert_eq!(s.get(2, 1), 0.0);
    }

    #[test]
    fn interior_row_sums() {
        // Away from the boundary the mass row sums to the hat integral and
        // the stiffness row annihilates constants.
        let mesh = UniformMesh::new(1, 7).unwrap();
        let m = assemble_mass(&mesh);
        let s = assemble_stiffness(&mesh);
        let h = mesh.grid_spacing();
        let row_sum = |a: &SymBandMatrix, i: usize| -> f64 {
            (0..a.dim()).map(|j| a.get(i, j)).sum()
        };
        assert_abs_diff_eq!(row_sum(&m, 3), h, epsilon = 1e-15);
        assert_abs_diff_eq!(row_sum(&s, 3), 0.0, epsilon = 1e-12);

        let mesh2 = UniformMesh::new(2, 5).unwrap();
        let m2 = assemble_mass(&mesh2);
        let s2 = assemble_stiffness(&mesh2);
        let h2 = mesh2.grid_spacing();
        let centre = mesh2.node_index(&[2, 2]);
        assert_abs_diff_eq!(row_sum(&m2, centre), h2 * h2, epsilon = 1e-15);
        assert_abs_diff_eq!(row_sum(&s2, centre), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_node_mesh() {
        let mesh = UniformMesh::new(1, 1).unwrap();
        let m = assemble_mass(&mesh);
        let s = assemble_stiffness(&mesh);
        assert_eq!(m.dim(), 1);
        assert_abs_diff_eq!(m.get(0, 0), 1.0 / 3.0, epsilon = 1e-16);
        assert_abs_diff_eq!(s.get(0, 0), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn mass_total_integrates_the_interior_partition_of_unity() {
        // Sum of all entries of M is the integral of (sum of interior hats)
        // squared, which is 1 on [h, 1-h] and ramps like (x/h)^2 over each
        // boundary cell: total = 1 - 2h + 2h/3 = 1 - 4h/3.
        let mesh = UniformMesh::new(1, 6).unwrap();
        let m = assemble_mass(&mesh);
        let total: f64 =
            (0..m.dim()).map(|i| (0..m.dim()).map(|j| m.get(i, j)).sum::<f64>()).sum();
        let h = mesh.grid_spacing();
        assert_abs_diff_eq!(total, 1.0 - 4.0 * h / 3.0, epsilon = 1e-14);
    }
}
