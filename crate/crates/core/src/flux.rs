//! Phase-space fields: angular flux on cells and data on boundary faces.

use crate::error::{Error, Result};

/// `φ(cell, direction)`, stored cell-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularFlux {
    n_cells: usize,
    n_dir: usize,
    values: Vec<f64>,
}

impl AngularFlux {
    pub fn zeros(n_cells: usize, n_dir: usize) -> Self {
        Self::constant(n_cells, n_dir, 0.0)
    }

    pub fn constant(n_cells: usize, n_dir: usize, value: f64) -> Self {
        AngularFlux {
            n_cells,
            n_dir,
            values: vec![value; n_cells * n_dir],
        }
    }

    pub fn from_values(n_cells: usize, n_dir: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_cells * n_dir {
            return Err(Error::shape(
                format!("{n_cells}x{n_dir} values"),
                values.len(),
            ));
        }
        Ok(AngularFlux {
            n_cells,
            n_dir,
            values,
        })
    }

    pub fn from_fn(n_cells: usize, n_dir: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(n_cells * n_dir);
        for c in 0..n_cells {
            for k in 0..n_dir {
                values.push(f(c, k));
            }
        }
        AngularFlux {
            n_cells,
            n_dir,
            values,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_dir(&self) -> usize {
        self.n_dir
    }

    pub fn get(&self, cell: usize, k: usize) -> f64 {
        self.values[cell * self.n_dir + k]
    }

    pub fn set(&mut self, cell: usize, k: usize, value: f64) {
        self.values[cell * self.n_dir + k] = value;
    }

    /// All directions at one cell.
    pub fn cell(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.n_dir..(cell + 1) * self.n_dir]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_shape(&self, other: &AngularFlux) -> bool {
        self.n_cells == other.n_cells && self.n_dir == other.n_dir
    }

    pub(crate) fn check_shape(&self, n_cells: usize, n_dir: usize) -> Result<()> {
        if self.n_cells != n_cells || self.n_dir != n_dir {
            return Err(Error::shape(
                format!("flux {n_cells}x{n_dir}"),
                format!("{}x{}", self.n_cells, self.n_dir),
            ));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        AngularFlux {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..*self
        }
    }

    /// `self + t·other`.
    pub fn axpy(&self, t: f64, other: &AngularFlux) -> Self {
        assert!(self.same_shape(other), "flux shapes differ");
        AngularFlux {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + t * b)
                .collect(),
            ..*self
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Which half of the boundary phase space a [`BoundaryData`] lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowSide {
    /// `s·n < 0`.
    Inflow,
    /// `s·n > 0`.
    Outflow,
}

/// Values on `(boundary face, direction)` pairs of one side.
///
/// Storage is dense face-major; entries on the other side of the boundary
/// are held at zero and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    side: FlowSide,
    n_faces: usize,
    n_dir: usize,
    values: Vec<f64>,
}

impl BoundaryData {
    pub(crate) fn new_unchecked(
        side: FlowSide,
        n_faces: usize,
        n_dir: usize,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), n_faces * n_dir);
        BoundaryData {
            side,
            n_faces,
            n_dir,
            values,
        }
    }

    pub fn side(&self) -> FlowSide {
        self.side
    }

    pub fn n_faces(&self) -> usize {
        self.n_faces
    }

    pub fn n_dir(&self) -> usize {
        self.n_dir
    }

    pub fn get(&self, face: usize, k: usize) -> f64 {
        self.values[face * self.n_dir + k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
