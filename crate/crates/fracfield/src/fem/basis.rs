//! Evaluation of the interior hat functions at arbitrary points.

use crate::error::{Error, Result};
use crate::fem::UniformMesh;

/// Evaluates all hat functions at `x`, returning `(node index, value)` pairs
/// for the non-zero ones, sorted by node index.
///
/// At most `d + 1` entries come back (the vertices of the element containing
/// `x`, minus boundary vertices); boundary points and points in cells whose
/// interior vertices all vanish yield an empty vector. The weights are
/// barycentric coordinates, so together with the omitted boundary nodes they
/// always sum to one.
pub fn basis_eval(mesh: &UniformMesh, x: &[f64]) -> Result<Vec<(usize, f64)>> {
    let d = mesh.dimension();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            point: x.to_vec(),
            got: x.len(),
            expected: d,
        });
    }
    if x.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
        return Err(Error::OutOfDomain(x.to_vec()));
    }
    let n = mesh.interior_per_axis();
    let h = mesh.grid_spacing();
    // Cell index and local coordinate along each axis; x = 1 falls in the
    // last cell with local coordinate 1.
    let locate = |c: f64| -> (usize, f64) {
        let t = c / h;
        let cell = (t.floor() as usize).min(n);
        (cell, t - cell as f64)
    };
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(d + 1);
    let mut push = |grid: &[usize], w: f64| {
        if w != 0.0 {
            if let Some(dof) = mesh.grid_to_dof(grid) {
                out.push((dof, w));
            }
        }
    };
    match d {
        1 => {
            let (cell, s) = locate(x[0]);
            push(&[cell], 1.0 - s);
            push(&[cell + 1], s);
        }
        _ => {
            let (cx, sx) = locate(x[0]);
            let (cy, sy) = locate(x[1]);
            // Cells split along the lower-left to upper-right diagonal; the
            // barycentric weights below are affine on each triangle and match
            // the vertex values of the three hats.
            if sx >= sy {
                push(&[cx, cy], 1.0 - sx);
                push(&[cx + 1, cy], sx - sy);
                push(&[cx + 1, cy + 1], sy);
            } else {
                push(&[cx, cy], 1.0 - sy);
                push(&[cx + 1, cy + 1], sx);
                push(&[cx, cy + 1], sy - sx);
            }
        }
    }
    out.sort_unstable_by_key(|&(idx, _)| idx);
    Ok(out)
}
