//! Reference element-loop assembly.
//!
//! Local matrices are computed from vertex coordinates with textbook P1
//! formulas and scattered element by element, sharing nothing with the
//! stencil shortcuts in [`crate::fem::assemble_mass`] and
//! [`crate::fem::assemble_stiffness`]. The stencil assembly is validated
//! against this loop entry-wise.

use crate::fem::UniformMesh;
use crate::linalg::SymBandMatrix;

fn band_width(mesh: &UniformMesh) -> usize {
    match mesh.dimension() {
        1 => 1,
        _ => mesh.interior_per_axis() + 1,
    }
}

/// Mass matrix assembled element by element.
pub fn assemble_mass_elementwise(mesh: &UniformMesh) -> SymBandMatrix {
    assemble(mesh, Local::Mass)
}

/// Stiffness matrix assembled element by element.
pub fn assemble_stiffness_elementwise(mesh: &UniformMesh) -> SymBandMatrix {
    assemble(mesh, Local::Stiffness)
}

#[derive(Clone, Copy)]
enum Local {
    Mass,
    Stiffness,
}

fn assemble(mesh: &UniformMesh, which: Local) -> SymBandMatrix {
    let n = mesh.interior_per_axis();
    let h = mesh.grid_spacing();
    let mut a = SymBandMatrix::new(mesh.dof_count(), band_width(mesh));
    match mesh.dimension() {
        1 => {
            // Elements [e h, (e+1) h] with vertices at grid nodes e, e+1.
            let local = match which {
                Local::Mass => [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]],
                Local::Stiffness => [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]],
            };
            for e in 0..=n {
                let verts = [e, e + 1];
                for (li, &gi) in verts.iter().enumerate() {
                    let Some(di) = mesh.grid_to_dof(&[gi]) else { continue };
                    for (lj, &gj) in verts.iter().enumerate().take(li + 1) {
                        let Some(dj) = mesh.grid_to_dof(&[gj]) else { continue };
                        a.add(di, dj, local[li][lj]);
                    }
                }
            }
        }
        _ => {
            // Each cell splits into two triangles along the lower-left to
            // upper-right diagonal.
            for cy in 0..=n {
                for cx in 0..=n {
                    let ll = [cx, cy];
                    let lr = [cx + 1, cy];
                    let ur = [cx + 1, cy + 1];
                    let ul = [cx, cy + 1];
                    for tri in [[ll, lr, ur], [ll, ur, ul]] {
                        scatter_triangle(mesh, &mut a, &tri, h, which);
                    }
                }
            }
        }
    }
    a
}

fn scatter_triangle(
    mesh: &UniformMesh,
    a: &mut SymBandMatrix,
    tri: &[[usize; 2]; 3],
    h: f64,
    which: Local,
) {
    let xy: Vec<[f64; 2]> = tri.iter().map(|g| [g[0] as f64 * h, g[1] as f64 * h]).collect();
    // Signed area from the shoelace formula; the triangles above are
    // positively oriented.
    let area = 0.5
        * ((xy[1][0] - xy[0][0]) * (xy[2][1] - xy[0][1])
            - (xy[2][0] - xy[0][0]) * (xy[1][1] - xy[0][1]));
    let mut local = [[0.0f64; 3]; 3];
    match which {
        Local::Mass => {
            for (i, row) in local.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                }
            }
        }
        Local::Stiffness => {
            // Gradient coefficients of the barycentric coordinates:
            // lambda_i has gradient (b_i, c_i) / (2 area).
            let b = [xy[1][1] - xy[2][1], xy[2][1] - xy[0][1], xy[0][1] - xy[1][1]];
            let c = [xy[2][0] - xy[1][0], xy[0][0] - xy[2][0], xy[1][0] - xy[0][0]];
            for (i, row) in local.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
                }
            }
        }
    }
    for li in 0..3 {
        let Some(di) = mesh.grid_to_dof(&tri[li]) else { continue };
        for lj in 0..=li {
            let Some(dj) = mesh.grid_to_dof(&tri[lj]) else { continue };
            a.add(di, dj, local[li][lj]);
        }
    }
}
