//! Discrete H¹(ℛ) inner product on the masked grid.

use crate::grid::SpatialGrid;

/// Gram matrix `G = h² I + L`, where `L` is the unit-weight graph Laplacian of
/// the interior edges. For a cell field `v`,
/// `vᵀ G v = Σ_c h² v_c² + Σ_{edges} h² ((v_a − v_b)/h)²`, i.e. the L² mass
/// plus the squared one-sided difference gradient, with no coupling across
/// the staircase boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct H1Metric {
    area: f64,
    edges: Vec<(usize, usize)>,
    degree: Vec<f64>,
    factor: BandedCholesky,
}

impl H1Metric {
    pub fn new(grid: &SpatialGrid) -> Self {
        let n = grid.num_cells();
        let area = grid.cell_area();
        let edges = grid.interior_edges();
        let mut degree = vec![0.0; n];
        for &(a, b) in &edges {
            degree[a] += 1.0;
            degree[b] += 1.0;
        }
        let bandwidth = edges.iter().map(|&(a, b)| a.abs_diff(b)).max().unwrap_or(0);
        let mut band = BandedSpd::zeros(n, bandwidth);
        for c in 0..n {
            band.add(c, c, area + degree[c]);
        }
        for &(a, b) in &edges {
            band.add(a.max(b), a.min(b), -1.0);
        }
        let factor = BandedCholesky::factor(band).expect("H¹ Gram matrix is positive definite");
        H1Metric {
            area,
            edges,
            degree,
            factor,
        }
    }

    /// Number of cells of one field.
    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    /// `G v` for one field.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = v
            .iter()
            .zip(&self.degree)
            .map(|(x, d)| (self.area + d) * x)
            .collect();
        for &(a, b) in &self.edges {
            out[a] -= v[b];
            out[b] -= v[a];
        }
        out
    }

    /// `G⁻¹ v` for one field.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        self.factor.solve(v)
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s: f64 = a.iter().zip(b).map(|(x, y)| self.area * x * y).sum();
        for &(i, j) in &self.edges {
            s += (a[i] - a[j]) * (b[i] - b[j]);
        }
        s
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// Block-diagonal versions acting on `[μ; σ]`.
    pub fn apply_pair(&self, x: &[f64]) -> Vec<f64> {
        let (m, s) = x.split_at(self.len());
        let mut out = self.apply(m);
        out.extend(self.apply(s));
        out
    }

    pub fn solve_pair(&self, x: &[f64]) -> Vec<f64> {
        let (m, s) = x.split_at(self.len());
        let mut out = self.solve(m);
        out.extend(self.solve(s));
        out
    }

    pub fn inner_pair(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.len();
        self.inner(&a[..n], &b[..n]) + self.inner(&a[n..], &b[n..])
    }

    pub fn norm_pair(&self, x: &[f64]) -> f64 {
        self.inner_pair(x, x).max(0.0).sqrt()
    }
}

/// Lower band of a symmetric matrix: `rows[i][j - (i - bw)]` for `i - bw ≤ j ≤ i`.
#[derive(Debug, Clone, PartialEq)]
struct BandedSpd {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSpd {
    fn zeros(n: usize, bw: usize) -> Self {
        BandedSpd {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }
}

#[derive(Debug, Clone, PartialEq)]
struct BandedCholesky {
    lower: BandedSpd,
}

impl BandedCholesky {
    fn factor(a: BandedSpd) -> Option<Self> {
        let n = a.n;
        let bw = a.bw;
        let mut l = BandedSpd::zeros(n, bw);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut s = a.get(i, j);
                for k in klo..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                let k = l.idx(i, j);
                if i == j {
                    if s <= 0.0 {
                        return None;
                    }
                    l.data[k] = s.sqrt();
                } else {
                    l.data[k] = s / l.get(j, j);
                }
            }
        }
        Some(BandedCholesky { lower: l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.lower;
        let n = l.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(l.bw)..i {
                s -= l.get(i, k) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n.min(i + l.bw + 1) {
                s -= l.get(k, i) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        y
    }
}
