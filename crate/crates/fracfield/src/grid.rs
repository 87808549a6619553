//! Tensor evaluation grids on the closed unit domain.

use crate::error::{Error, Result};

/// Uniform tensor grid over `[0, 1]^d` including the boundary, with the same
/// number of points along every axis.
///
/// Values on the grid are stored flat with the first coordinate fastest:
/// point `(i1, i2)` lives at index `i2 * points_per_axis + i1` in two
/// dimensions, matching the lexicographic mesh node ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dimension: usize,
    points_per_axis: usize,
}

impl Grid {
    /// A grid with `points_per_axis >= 2` points per axis (the two endpoints
    /// at least) in dimension 1 or 2.
    pub fn uniform(dimension: usize, points_per_axis: usize) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::InvalidDimension(dimension));
        }
        if points_per_axis < 2 {
            return Err(Error::InvalidGrid(points_per_axis));
        }
        Ok(Grid { dimension, points_per_axis })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Spacing between adjacent points on one axis.
    pub fn spacing(&self) -> f64 {
        1.0 / (self.points_per_axis - 1) as f64
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of axis point `i`.
    pub fn axis_point(&self, i: usize) -> f64 {
        debug_assert!(i < self.points_per_axis);
        i as f64 * self.spacing()
    }

    /// Coordinates of the flat grid point `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        debug_assert!(idx < self.len());
        match self.dimension {
            1 => vec![self.axis_point(idx)],
            _ => {
                let m = self.points_per_axis;
                vec![self.axis_point(idx % m), self.axis_point(idx / m)]
            }
        }
    }

    /// Flat index of the grid point with the given per-axis indices.
    pub fn flat_index(&self, axis_indices: &[usize]) -> usize {
        debug_assert_eq!(axis_indices.len(), self.dimension);
        match self.dimension {
            1 => axis_indices[0],
            _ => axis_indices[1] * self.points_per_axis + axis_indices[0],
        }
    }

    /// Trapezoidal rule over the grid: endpoint weights are halved along each
    /// axis. Exact for functions linear on every cell.
    pub fn trapezoid(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::GridMismatch { got: values.len(), expected: self.len() });
        }
        let m = self.points_per_axis;
        let dx = self.spacing();
        let w = |i: usize| if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
        match self.dimension {
            1 => {
                let mut acc = 0.0;
                for (i, v) in values.iter().enumerate() {
                    acc += w(i) * v;
                }
                Ok(acc * dx)
            }
            _ => {
                let mut acc = 0.0;
                for i2 in 0..m {
                    let row = &values[i2 * m..(i2 + 1) * m];
                    let mut row_acc = 0.0;
                    for (i1, v) in row.iter().enumerate() {
                        row_acc += w(i1) * v;
                    }
                    acc += w(i2) * row_acc;
                }
                Ok(acc * dx * dx)
            }
        }
    }
}
