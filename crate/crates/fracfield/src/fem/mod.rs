//! Piecewise linear finite elements on uniform meshes of the unit domain.
//!
//! Meshes are uniform grids of the interval or the square with homogeneous
//! Dirichlet conditions, so only interior nodes carry unknowns. In two
//! dimensions every grid cell is split into two triangles along the diagonal
//! from its lower-left to its upper-right corner.
//!
//! Mass and stiffness matrices are assembled from closed-form stencils;
//! [`oracle`] holds an independent element-loop assembly used to validate
//! them.

mod assembly;
mod basis;
mod mesh;
pub mod oracle;

pub use assembly::{assemble_mass, assemble_stiffness};
pub use basis::basis_eval;
pub use mesh::UniformMesh;
