//! Cartesian cell grid masked to a disk.
//!
//! The bounding box `[-R, R]²` is split into `n × n` square cells of width
//! `h = 2R/n`. A cell belongs to the computational domain when its center lies
//! inside the closed disk of radius `R`. Masked cells are numbered row-major
//! (rows of constant `y`, increasing `x` within a row, rows by increasing `y`).
//! Every edge of a masked cell that touches a masked-out cell or the bounding
//! box is a boundary face with an axis-aligned outward normal.

use crate::error::{Error, Result};

/// One of the four axis-aligned cell sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    East,
    West,
    North,
    South,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::East, Side::West, Side::North, Side::South];

    /// Outward unit normal of this side.
    pub fn normal(self) -> [f64; 2] {
        match self {
            Side::East => [1.0, 0.0],
            Side::West => [-1.0, 0.0],
            Side::North => [0.0, 1.0],
            Side::South => [0.0, -1.0],
        }
    }

    fn index(self) -> usize {
        match self {
            Side::East => 0,
            Side::West => 1,
            Side::North => 2,
            Side::South => 3,
        }
    }

    fn offset(self) -> (isize, isize) {
        match self {
            Side::East => (1, 0),
            Side::West => (-1, 0),
            Side::North => (0, 1),
            Side::South => (0, -1),
        }
    }
}

/// What lies across a cell side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    /// Another masked cell (masked index).
    Cell(usize),
    /// A boundary face (index into [`SpatialGrid::boundary_faces`]).
    Boundary(usize),
}

/// An exposed cell edge on the staircase boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFace {
    /// Masked index of the cell owning the face.
    pub cell: usize,
    pub side: Side,
    /// Outward unit normal of the face.
    pub normal: [f64; 2],
    pub center: [f64; 2],
    /// Geometric edge length (`h`).
    pub length: f64,
    /// Length of the circle arc this face stands in for: `h · (n · r̂)` with
    /// `r̂` the radial direction at the face center.
    pub arc_length: f64,
    /// Polar angle of the face center in `(-π, π]`.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Cell {
    ix: usize,
    iy: usize,
    center: [f64; 2],
    neighbors: [Neighbor; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    n: usize,
    h: f64,
    radius: f64,
    interior_mask: Vec<bool>,
    masked_index: Vec<Option<usize>>,
    cells: Vec<Cell>,
    faces: Vec<BoundaryFace>,
    sweep_orders: [Vec<usize>; 4],
}

impl SpatialGrid {
    /// Builds the masked grid with `n` cells per axis on a disk of the given radius.
    pub fn build(n: usize, radius: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 cells per axis, got {n}"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "radius must be positive, got {radius}"
            )));
        }
        let h = 2.0 * radius / n as f64;
        let center_of = |ix: usize, iy: usize| {
            [
                -radius + (ix as f64 + 0.5) * h,
                -radius + (iy as f64 + 0.5) * h,
            ]
        };

        let mut interior_mask = vec![false; n * n];
        let mut masked_index = vec![None; n * n];
        let mut count = 0;
        for iy in 0..n {
            for ix in 0..n {
                let [x, y] = center_of(ix, iy);
                if x.hypot(y) <= radius {
                    interior_mask[iy * n + ix] = true;
                    masked_index[iy * n + ix] = Some(count);
                    count += 1;
                }
            }
        }
        if count == 0 {
            return Err(Error::InvalidGrid("mask selects no cells".into()));
        }

        let lookup = |ix: isize, iy: isize| -> Option<usize> {
            if ix < 0 || iy < 0 || ix >= n as isize || iy >= n as isize {
                None
            } else {
                masked_index[iy as usize * n + ix as usize]
            }
        };

        let mut cells = Vec::with_capacity(count);
        let mut faces = Vec::new();
        for iy in 0..n {
            for ix in 0..n {
                let Some(index) = masked_index[iy * n + ix] else {
                    continue;
                };
                let center = center_of(ix, iy);
                let mut neighbors = [Neighbor::Cell(usize::MAX); 4];
                for side in Side::ALL {
                    let (dx, dy) = side.offset();
                    neighbors[side.index()] = match lookup(ix as isize + dx, iy as isize + dy) {
                        Some(other) => Neighbor::Cell(other),
                        None => {
                            let normal = side.normal();
                            let fc = [
                                center[0] + 0.5 * h * normal[0],
                                center[1] + 0.5 * h * normal[1],
                            ];
                            let r = fc[0].hypot(fc[1]);
                            let radial = (normal[0] * fc[0] + normal[1] * fc[1]) / r;
                            faces.push(BoundaryFace {
                                cell: index,
                                side,
                                normal,
                                center: fc,
                                length: h,
                                arc_length: h * radial.max(0.0),
                                angle: fc[1].atan2(fc[0]),
                            });
                            Neighbor::Boundary(faces.len() - 1)
                        }
                    };
                }
                cells.push(Cell {
                    ix,
                    iy,
                    center,
                    neighbors,
                });
            }
        }

        let sweep_orders = quadrant_orders(&cells);
        Ok(SpatialGrid {
            n,
            h,
            radius,
            interior_mask,
            masked_index,
            cells,
            faces,
            sweep_orders,
        })
    }

    /// Cells per axis of the bounding box.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// Number of masked (computational) cells.
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// Total area of the masked cells.
    pub fn masked_area(&self) -> f64 {
        self.cell_area() * self.num_cells() as f64
    }

    /// Row-major `n × n` mask of the bounding box.
    pub fn interior_mask(&self) -> &[bool] {
        &self.interior_mask
    }

    /// Masked index of bounding-box cell `(ix, iy)`, if it is inside the disk.
    pub fn masked_index(&self, ix: usize, iy: usize) -> Option<usize> {
        if ix >= self.n || iy >= self.n {
            return None;
        }
        self.masked_index[iy * self.n + ix]
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        self.cells[cell].center
    }

    /// Bounding-box coordinates `(ix, iy)` of a masked cell.
    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        (self.cells[cell].ix, self.cells[cell].iy)
    }

    pub fn neighbor(&self, cell: usize, side: Side) -> Neighbor {
        self.cells[cell].neighbors[side.index()]
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.faces
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Pairs of masked cells sharing an interior edge, each listed once with
    /// the lower index first.
    pub fn interior_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (c, cell) in self.cells.iter().enumerate() {
            for side in [Side::East, Side::North] {
                if let Neighbor::Cell(other) = cell.neighbors[side.index()] {
                    edges.push((c, other));
                }
            }
        }
        edges
    }

    /// Cell visiting order in which every upwind neighbor of a direction with
    /// the given component signs is visited first.
    pub(crate) fn sweep_order(&self, positive_x: bool, positive_y: bool) -> &[usize] {
        &self.sweep_orders[quadrant_index(positive_x, positive_y)]
    }

    /// Scatters a per-cell field onto the `n × n` box, one inner vector per grid
    /// row (row 0 at `y = -R`). Masked-out cells hold `fill`.
    pub fn to_rows(&self, field: &[f64], fill: f64) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![fill; self.n]; self.n];
        for (cell, value) in self.cells.iter().zip(field) {
            rows[cell.iy][cell.ix] = *value;
        }
        rows
    }

    /// Inverse of [`SpatialGrid::to_rows`]; masked-out entries are ignored.
    pub fn from_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
            return Err(Error::shape(
                format!("{0}x{0} matrix", self.n),
                format!(
                    "{} rows with lengths {:?}",
                    rows.len(),
                    rows.iter().map(Vec::len).collect::<Vec<_>>()
                ),
            ));
        }
        Ok(self.cells.iter().map(|c| rows[c.iy][c.ix]).collect())
    }
}

fn quadrant_index(positive_x: bool, positive_y: bool) -> usize {
    (positive_x as usize) | ((positive_y as usize) << 1)
}

fn quadrant_orders(cells: &[Cell]) -> [Vec<usize>; 4] {
    let natural: Vec<usize> = (0..cells.len()).collect();
    let mut orders: [Vec<usize>; 4] = Default::default();
    for px in [false, true] {
        for py in [false, true] {
            let mut order = natural.clone();
            order.sort_by_key(|&c| {
                let ix = cells[c].ix as isize;
                let iy = cells[c].iy as isize;
                (if py { iy } else { -iy }, if px { ix } else { -ix })
            });
            orders[quadrant_index(px, py)] = order;
        }
    }
    orders
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(matches!(
            SpatialGrid::build(2, 1.0),
            Err(Error::InvalidGrid(_))
        ));
        assert!(SpatialGrid::build(3, 1.0).is_err());
        assert!(SpatialGrid::build(8, 0.0).is_err());
        assert!(SpatialGrid::build(8, f64::NAN).is_err());
    }

    #[test]
    fn four_by_four_keeps_twelve_cells() {
        // Centers at ±0.25, ±0.75: only the four corners (|c| ≈ 1.06) fall outside.
        let grid = SpatialGrid::build(4, 1.0).unwrap();
        assert_eq!(grid.num_cells(), 12);
        for (ix, iy) in [(0, 0), (3, 0), (0, 3), (3, 3)] {
            assert_eq!(grid.masked_index(ix, iy), None);
        }
    }

    #[test]
    fn cell_count_tracks_disk_area() {
        let grid = SpatialGrid::build(64, 25.0).unwrap();
        let expected = std::f64::consts::PI * 32.0 * 32.0;
        let count = grid.num_cells() as f64;
        assert!((count - expected).abs() / expected < 0.05, "count {count}");
    }

    #[test]
    fn masked_centers_inside_disk() {
        let grid = SpatialGrid::build(21, 3.0).unwrap();
        for c in 0..grid.num_cells() {
            let [x, y] = grid.cell_center(c);
            assert!(x.hypot(y) <= grid.radius());
        }
    }

    #[test]
    fn boundary_faces_partition_exposed_edges() {
        let grid = SpatialGrid::build(17, 2.0).unwrap();
        let mut seen = HashSet::new();
        for face in grid.boundary_faces() {
            let norm = face.normal[0].hypot(face.normal[1]);
            assert!((norm - 1.0).abs() < 1e-15);
            assert!(face.arc_length > 0.0 && face.arc_length <= face.length);
            assert!(seen.insert((face.cell, face.side)));
        }
        let mut exposed = 0;
        for c in 0..grid.num_cells() {
            let (ix, iy) = grid.cell_coords(c);
            for side in Side::ALL {
                let (dx, dy) = side.offset();
                let (nx, ny) = (ix as isize + dx, iy as isize + dy);
                let outside = nx < 0
                    || ny < 0
                    || nx >= grid.n() as isize
                    || ny >= grid.n() as isize
                    || grid.masked_index(nx as usize, ny as usize).is_none();
                if outside {
                    exposed += 1;
                    assert!(seen.contains(&(c, side)));
                    assert!(matches!(grid.neighbor(c, side), Neighbor::Boundary(_)));
                }
            }
        }
        assert_eq!(exposed, grid.num_faces());
    }

    #[test]
    fn arc_lengths_approximate_circumference() {
        let grid = SpatialGrid::build(128, 1.0).unwrap();
        let total: f64 = grid.boundary_faces().iter().map(|f| f.arc_length).sum();
        let exact = 2.0 * std::f64::consts::PI;
        assert!((total - exact).abs() / exact < 0.01, "total {total}");
    }

    #[test]
    fn sweep_orders_visit_upwind_cells_first() {
        let grid = SpatialGrid::build(12, 1.0).unwrap();
        for px in [false, true] {
            for py in [false, true] {
                let order = grid.sweep_order(px, py);
                let mut position = vec![0; grid.num_cells()];
                for (p, &c) in order.iter().enumerate() {
                    position[c] = p;
                }
                let upwind_x = if px { Side::West } else { Side::East };
                let upwind_y = if py { Side::South } else { Side::North };
                for c in 0..grid.num_cells() {
                    for side in [upwind_x, upwind_y] {
                        if let Neighbor::Cell(up) = grid.neighbor(c, side) {
                            assert!(position[up] < position[c]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rows_round_trip() {
        let grid = SpatialGrid::build(9, 1.0).unwrap();
        let field: Vec<f64> = (0..grid.num_cells()).map(|c| c as f64 * 0.5).collect();
        let rows = grid.to_rows(&field, f64::NAN);
        assert_eq!(grid.from_rows(&rows).unwrap(), field);
        assert!(grid.from_rows(&rows[1..]).is_err());
    }
}
