#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtt_core::grid::Neighbor;
use rtt_core::{
    AngularFlux, AngularQuadrature, BoundaryData, Bounds, Discretization, ParameterPair,
    ParameterVariation, Side, SpatialGrid,
};

pub fn disc(n: usize, radius: f64, n_dir: usize) -> Discretization {
    Discretization::new(
        SpatialGrid::build(n, radius).unwrap(),
        AngularQuadrature::build(n_dir).unwrap(),
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_flux(d: &Discretization, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> AngularFlux {
    AngularFlux::from_fn(d.n_cells(), d.n_dir(), |_, _| rng.gen_range(lo..hi))
}

pub fn random_field(n: usize, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn random_variation(n: usize, rng: &mut ChaCha8Rng, mu: f64, sigma: f64) -> ParameterVariation {
    ParameterVariation {
        mu: random_field(n, rng, -mu, mu),
        sigma: random_field(n, rng, -sigma, sigma),
    }
}

pub fn random_params(
    n: usize,
    rng: &mut ChaCha8Rng,
    mu: (f64, f64),
    sigma: (f64, f64),
    bounds: Bounds,
) -> ParameterPair {
    ParameterPair::new(
        random_field(n, rng, mu.0, mu.1),
        random_field(n, rng, sigma.0, sigma.1),
        bounds,
    )
    .unwrap()
}

/// Unknown index of `(cell, direction)`.
pub fn unknown(d: &Discretization, c: usize, k: usize) -> usize {
    c * d.n_dir() + k
}

/// Fully assembled upwind system `L φ = f + b(g)`, built directly from the
/// stencil definition without going through the sweeps.
pub fn dense_system(
    d: &Discretization,
    params: &ParameterPair,
    f: Option<&AngularFlux>,
    g: Option<&BoundaryData>,
) -> (DMatrix<f64>, DVector<f64>) {
    let grid = d.grid();
    let quad = d.quad();
    let n = d.n_cells() * d.n_dir();
    let h = grid.h();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    for c in 0..d.n_cells() {
        for k in 0..d.n_dir() {
            let [sx, sy] = quad.direction(k);
            let row = unknown(d, c, k);
            a[(row, row)] += (sx.abs() + sy.abs()) / h + params.mu()[c] + params.sigma()[c];
            for j in 0..d.n_dir() {
                a[(row, unknown(d, c, j))] -= params.sigma()[c] * quad.weight(j);
            }
            let up_x = if sx > 0.0 { Side::West } else { Side::East };
            let up_y = if sy > 0.0 { Side::South } else { Side::North };
            for (side, coef) in [(up_x, sx.abs() / h), (up_y, sy.abs() / h)] {
                match grid.neighbor(c, side) {
                    Neighbor::Cell(u) => a[(row, unknown(d, u, k))] -= coef,
                    Neighbor::Boundary(face) => {
                        if let Some(g) = g {
                            b[row] += coef * g.get(face, k);
                        }
                    }
                }
            }
            if let Some(f) = f {
                b[row] += f.get(c, k);
            }
        }
    }
    (a, b)
}

pub fn to_flux(d: &Discretization, v: &DVector<f64>) -> AngularFlux {
    AngularFlux::from_values(d.n_cells(), d.n_dir(), v.iter().copied().collect()).unwrap()
}

pub fn max_rel_diff(a: &AngularFlux, b: &AngularFlux) -> f64 {
    let diff = a.axpy(-1.0, b).max_abs();
    diff / b.max_abs().max(f64::MIN_POSITIVE)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
