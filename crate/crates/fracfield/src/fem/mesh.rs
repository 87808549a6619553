//! Uniform meshes of the unit interval and unit square.

use crate::error::{Error, Result};

/// Uniform mesh of `(0, 1)^d` with `n` interior nodes per axis.
///
/// Grid nodes sit at integer multiples of the spacing `1 / (n + 1)`; the
/// boundary nodes carry no unknowns. Interior nodes are numbered
/// lexicographically with the first coordinate fastest: in two dimensions the
/// node at `((ix + 1) h, (iy + 1) h)` has index `iy * n + ix`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformMesh {
    dimension: usize,
    interior_per_axis: usize,
}

impl UniformMesh {
    /// Builds a mesh with `interior_per_axis >= 1` interior nodes per axis in
    /// dimension 1 or 2.
    pub fn new(dimension: usize, interior_per_axis: usize) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::InvalidDimension(dimension));
        }
        if interior_per_axis == 0 {
            return Err(Error::InvalidMesh(interior_per_axis));
        }
        Ok(UniformMesh { dimension, interior_per_axis })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn interior_per_axis(&self) -> usize {
        self.interior_per_axis
    }

    /// Distance between neighbouring grid nodes along one axis.
    pub fn grid_spacing(&self) -> f64 {
        1.0 / (self.interior_per_axis + 1) as f64
    }

    /// Largest element diameter: the grid spacing in one dimension, and the
    /// cell diagonal in two (the elements are right triangles).
    pub fn mesh_size(&self) -> f64 {
        match self.dimension {
            1 => self.grid_spacing(),
            _ => std::f64::consts::SQRT_2 * self.grid_spacing(),
        }
    }

    /// Number of unknowns: `n^d`.
    pub fn dof_count(&self) -> usize {
        self.interior_per_axis.pow(self.dimension as u32)
    }

    /// Coordinates of interior node `k`.
    pub fn node_point(&self, k: usize) -> Vec<f64> {
        debug_assert!(k < self.dof_count());
        let h = self.grid_spacing();
        match self.dimension {
            1 => vec![(k + 1) as f64 * h],
            _ => {
                let n = self.interior_per_axis;
                vec![((k % n) + 1) as f64 * h, ((k / n) + 1) as f64 * h]
            }
        }
    }

    /// Index of the interior node with 0-based per-axis positions `axes`.
    pub fn node_index(&self, axes: &[usize]) -> usize {
        debug_assert_eq!(axes.len(), self.dimension);
        match self.dimension {
            1 => axes[0],
            _ => axes[1] * self.interior_per_axis + axes[0],
        }
    }

    /// Maps a grid node given by 0-based positions over the full grid
    /// (boundary included, `0..=n+1` per axis) to its unknown index, or
    /// `None` for boundary nodes.
    pub(crate) fn grid_to_dof(&self, grid: &[usize]) -> Option<usize> {
        let n = self.interior_per_axis;
        let mut axes = [0usize; 2];
        for (a, &g) in axes.iter_mut().zip(grid) {
            if g == 0 || g > n {
                return None;
            }
            *a = g - 1;
        }
        Some(self.node_index(&axes[..self.dimension]))
    }
}
