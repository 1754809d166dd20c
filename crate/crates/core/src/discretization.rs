//! Phase-space discretization: the masked grid paired with a direction set.

use crate::flux::{AngularFlux, BoundaryData, FlowSide};
use crate::grid::SpatialGrid;
use crate::quadrature::AngularQuadrature;

/// Grid, quadrature and the cached face/direction cosines `s_k · n_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    grid: SpatialGrid,
    quad: AngularQuadrature,
    face_cos: Vec<f64>,
}

impl Discretization {
    pub fn new(grid: SpatialGrid, quad: AngularQuadrature) -> Self {
        let n_dir = quad.len();
        let mut face_cos = Vec::with_capacity(grid.num_faces() * n_dir);
        for face in grid.boundary_faces() {
            for s in quad.directions() {
                face_cos.push(s[0] * face.normal[0] + s[1] * face.normal[1]);
            }
        }
        Discretization {
            grid,
            quad,
            face_cos,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn quad(&self) -> &AngularQuadrature {
        &self.quad
    }

    pub fn n_cells(&self) -> usize {
        self.grid.num_cells()
    }

    pub fn n_dir(&self) -> usize {
        self.quad.len()
    }

    pub fn n_faces(&self) -> usize {
        self.grid.num_faces()
    }

    /// `s_k · n_f`.
    pub fn face_cos(&self, face: usize, k: usize) -> f64 {
        self.face_cos[face * self.n_dir() + k]
    }

    pub fn is_inflow(&self, face: usize, k: usize) -> bool {
        self.face_cos(face, k) < 0.0
    }

    pub fn zero_flux(&self) -> AngularFlux {
        AngularFlux::zeros(self.n_cells(), self.n_dir())
    }

    fn boundary_from_fn(
        &self,
        side: FlowSide,
        mut value: impl FnMut(usize, usize) -> f64,
    ) -> BoundaryData {
        let n_dir = self.n_dir();
        let mut values = vec![0.0; self.n_faces() * n_dir];
        for face in 0..self.n_faces() {
            for k in 0..n_dir {
                let c = self.face_cos(face, k);
                let on_side = match side {
                    FlowSide::Inflow => c < 0.0,
                    FlowSide::Outflow => c > 0.0,
                };
                if on_side {
                    values[face * n_dir + k] = value(face, k);
                }
            }
        }
        BoundaryData::new_unchecked(side, self.n_faces(), n_dir, values)
    }

    /// Inflow data `g(face, k)`, sampled only on pairs with `s·n < 0`.
    pub fn inflow_from_fn(&self, value: impl FnMut(usize, usize) -> f64) -> BoundaryData {
        self.boundary_from_fn(FlowSide::Inflow, value)
    }

    pub fn inflow_constant(&self, value: f64) -> BoundaryData {
        self.inflow_from_fn(|_, _| value)
    }

    pub fn outflow_from_fn(&self, value: impl FnMut(usize, usize) -> f64) -> BoundaryData {
        self.boundary_from_fn(FlowSide::Outflow, value)
    }

    /// `(u, v)` in L²(ℛ×𝒮): cell area times quadrature weight.
    pub fn inner(&self, u: &AngularFlux, v: &AngularFlux) -> f64 {
        let w = self.quad.weights();
        let n_dir = self.n_dir();
        let sum: f64 = u
            .values()
            .chunks_exact(n_dir)
            .zip(v.values().chunks_exact(n_dir))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .zip(w)
                    .map(|((x, y), wk)| wk * x * y)
                    .sum::<f64>()
            })
            .sum();
        self.grid.cell_area() * sum
    }

    pub fn norm(&self, u: &AngularFlux) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// Norm in L²(Γ±; |s·n|) over the side the data lives on.
    pub fn boundary_norm(&self, g: &BoundaryData) -> f64 {
        let mut sum = 0.0;
        for (f, face) in self.grid.boundary_faces().iter().enumerate() {
            for k in 0..self.n_dir() {
                let v = g.get(f, k);
                sum += face.length * self.quad.weight(k) * self.face_cos(f, k).abs() * v * v;
            }
        }
        sum.sqrt()
    }

    /// `(a, b)` in L²(ℛ) for per-cell fields.
    pub fn cell_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.grid.cell_area() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }
}
