//! Discrete transport, averaging and collision operators, and the forward solver.
//!
//! Space is discretized by first-order upwind finite volumes on the masked
//! grid, angle by the discrete ordinates of [`AngularQuadrature`]. For
//! direction `s = (s_x, s_y)` and cell `c`
//!
//! ```text
//! (𝒜φ)_c = (|s_x| (φ_c − φ_up,x) + |s_y| (φ_c − φ_up,y)) / h
//! ```
//!
//! where the upwind values come from the neighboring cell or, on a boundary
//! face, from the inflow data `g`. The scattering coupling is resolved by
//! iterating on the isotropic scattering source `u = σΘφ`; each iteration
//! sweeps every direction once.

use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::flux::{AngularFlux, BoundaryData, FlowSide};
use crate::grid::{Neighbor, Side};
use crate::krylov::gmres;
use crate::params::ParameterPair;
use crate::quadrature::AngularQuadrature;

/// Per-cell direction average `Σ_k w_k φ(c, k)`.
///
/// Accumulated as `φ(c, 0) + Σ_k w_k (φ(c, k) − φ(c, 0))` so that
/// isotropic cells average to themselves exactly and Θ is idempotent in
/// floating point.
pub fn scalar_flux(phi: &AngularFlux, quad: &AngularQuadrature) -> Vec<f64> {
    let w = quad.weights();
    phi.values()
        .chunks_exact(phi.n_dir())
        .map(|row| {
            let base = row[0];
            base + row
                .iter()
                .zip(w)
                .map(|(v, wk)| wk * (v - base))
                .sum::<f64>()
        })
        .collect()
}

/// The averaging operator Θ: replaces every direction by the cell average.
pub fn apply_theta(phi: &AngularFlux, quad: &AngularQuadrature) -> Result<AngularFlux> {
    check_dirs(phi, quad)?;
    let avg = scalar_flux(phi, quad);
    Ok(AngularFlux::from_fn(phi.n_cells(), phi.n_dir(), |c, _| {
        avg[c]
    }))
}

/// `μφ + σ(φ − Θφ)` for arbitrary cell fields `μ`, `σ` (signs unrestricted).
pub fn collision_with(
    phi: &AngularFlux,
    mu: &[f64],
    sigma: &[f64],
    quad: &AngularQuadrature,
) -> Result<AngularFlux> {
    check_dirs(phi, quad)?;
    if mu.len() != phi.n_cells() || sigma.len() != phi.n_cells() {
        return Err(Error::shape(
            format!("{} cell values", phi.n_cells()),
            format!("mu {} / sigma {}", mu.len(), sigma.len()),
        ));
    }
    let avg = scalar_flux(phi, quad);
    Ok(AngularFlux::from_fn(phi.n_cells(), phi.n_dir(), |c, k| {
        let v = phi.get(c, k);
        mu[c] * v + sigma[c] * (v - avg[c])
    }))
}

/// The collision operator 𝒞 = μI + σ(I − Θ).
pub fn apply_collision(
    phi: &AngularFlux,
    params: &ParameterPair,
    quad: &AngularQuadrature,
) -> Result<AngularFlux> {
    collision_with(phi, params.mu(), params.sigma(), quad)
}

/// Upwind discretization of `s·∇φ`, taking inflow face values from `g`
/// (zero inflow when `g` is `None`).
pub fn apply_transport(
    disc: &Discretization,
    phi: &AngularFlux,
    g: Option<&BoundaryData>,
) -> Result<AngularFlux> {
    phi.check_shape(disc.n_cells(), disc.n_dir())?;
    if let Some(g) = g {
        check_boundary(disc, g, FlowSide::Inflow)?;
    }
    let grid = disc.grid();
    let inv_h = 1.0 / grid.h();
    let mut out = disc.zero_flux();
    for k in 0..disc.n_dir() {
        let stencil = Stencil::new(disc, k);
        for c in 0..disc.n_cells() {
            let upwind = |side: Side| match grid.neighbor(c, side) {
                Neighbor::Cell(d) => phi.get(d, k),
                Neighbor::Boundary(f) => g.map_or(0.0, |g| g.get(f, k)),
            };
            let v = phi.get(c, k);
            let value = stencil.ax * (v - upwind(stencil.upwind_x))
                + stencil.ay * (v - upwind(stencil.upwind_y));
            out.set(c, k, value * inv_h);
        }
    }
    Ok(out)
}

/// Restriction of `φ` to the outflow pairs `s·n > 0`, using the value of the
/// cell owning each face.
pub fn outflow_trace(disc: &Discretization, phi: &AngularFlux) -> Result<BoundaryData> {
    phi.check_shape(disc.n_cells(), disc.n_dir())?;
    let faces = disc.grid().boundary_faces();
    Ok(disc.outflow_from_fn(|f, k| phi.get(faces[f].cell, k)))
}

/// How the scattering coupling is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatteringSolver {
    /// Plain fixed-point iteration on the scattering source.
    SourceIteration,
    /// Restarted GMRES on the fixed-point residual.
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual target, measured against `‖f‖ + ‖g‖`.
    pub rtol: f64,
    /// Maximum number of scattering iterations (full sweeps).
    pub max_iter: usize,
    pub method: ScatteringSolver,
    /// GMRES restart length.
    pub restart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rtol: 1e-10,
            max_iter: 10_000,
            method: ScatteringSolver::Krylov,
            restart: 200,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Stencil {
    /// `|s_x|`, `|s_y|`.
    ax: f64,
    ay: f64,
    positive_x: bool,
    positive_y: bool,
    upwind_x: Side,
    upwind_y: Side,
    downwind_x: Side,
    downwind_y: Side,
}

impl Stencil {
    fn new(disc: &Discretization, k: usize) -> Self {
        let [sx, sy] = disc.quad().direction(k);
        let positive_x = sx > 0.0;
        let positive_y = sy > 0.0;
        let (upwind_x, downwind_x) = if positive_x {
            (Side::West, Side::East)
        } else {
            (Side::East, Side::West)
        };
        let (upwind_y, downwind_y) = if positive_y {
            (Side::South, Side::North)
        } else {
            (Side::North, Side::South)
        };
        Stencil {
            ax: sx.abs(),
            ay: sy.abs(),
            positive_x,
            positive_y,
            upwind_x,
            upwind_y,
            downwind_x,
            downwind_y,
        }
    }
}

/// The discrete operator `𝒜 + 𝒞(μ, σ)` at fixed parameters, with solvers for
/// it and for its transpose in the L²(ℛ×𝒮) inner product.
#[derive(Debug, Clone)]
pub struct TransportSolver<'a> {
    disc: &'a Discretization,
    sigma: Vec<f64>,
    /// `μ + σ`.
    total: Vec<f64>,
    options: SolverOptions,
}

impl<'a> TransportSolver<'a> {
    pub fn new(
        disc: &'a Discretization,
        params: &ParameterPair,
        options: SolverOptions,
    ) -> Result<Self> {
        if params.len() != disc.n_cells() {
            return Err(Error::shape(
                format!("{} cell parameters", disc.n_cells()),
                params.len(),
            ));
        }
        Ok(TransportSolver {
            disc,
            sigma: params.sigma().to_vec(),
            total: params
                .mu()
                .iter()
                .zip(params.sigma())
                .map(|(m, s)| m + s)
                .collect(),
            options,
        })
    }

    pub fn discretization(&self) -> &'a Discretization {
        self.disc
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// One transport sweep for direction `k`: solves
    /// `(𝒜_k + μ + σ) ψ = iso + aniso(·, k)` with inflow `g`, or the transposed
    /// system (downwind coupling, zero outflow data) when `transposed`.
    fn sweep(
        &self,
        k: usize,
        iso: Option<&[f64]>,
        aniso: Option<&AngularFlux>,
        g: Option<&BoundaryData>,
        transposed: bool,
        out: &mut [f64],
    ) {
        let grid = self.disc.grid();
        let st = Stencil::new(self.disc, k);
        let inv_h = 1.0 / grid.h();
        let ax = st.ax * inv_h;
        let ay = st.ay * inv_h;
        let (order, side_x, side_y) = if transposed {
            (
                grid.sweep_order(!st.positive_x, !st.positive_y),
                st.downwind_x,
                st.downwind_y,
            )
        } else {
            (
                grid.sweep_order(st.positive_x, st.positive_y),
                st.upwind_x,
                st.upwind_y,
            )
        };
        for &c in order {
            let mut q = iso.map_or(0.0, |s| s[c]) + aniso.map_or(0.0, |f| f.get(c, k));
            for (side, a) in [(side_x, ax), (side_y, ay)] {
                let neighbor_value = match grid.neighbor(c, side) {
                    Neighbor::Cell(d) => out[d],
                    Neighbor::Boundary(f) if !transposed => g.map_or(0.0, |g| g.get(f, k)),
                    Neighbor::Boundary(_) => 0.0,
                };
                q += a * neighbor_value;
            }
            out[c] = q / (ax + ay + self.total[c]);
        }
    }

    /// `σ · Θ · T⁻¹(iso + aniso; g)` where `T` is the per-direction streaming
    /// plus total-interaction operator.
    fn scatter_source(
        &self,
        iso: Option<&[f64]>,
        aniso: Option<&AngularFlux>,
        g: Option<&BoundaryData>,
        transposed: bool,
        buf: &mut [f64],
        out: &mut [f64],
    ) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let quad = self.disc.quad();
        for k in 0..quad.len() {
            self.sweep(k, iso, aniso, g, transposed, buf);
            let w = quad.weight(k);
            for (o, b) in out.iter_mut().zip(buf.iter()) {
                *o += w * b;
            }
        }
        for (o, s) in out.iter_mut().zip(&self.sigma) {
            *o *= s;
        }
    }

    fn solve_impl(
        &self,
        f: Option<&AngularFlux>,
        g: Option<&BoundaryData>,
        transposed: bool,
    ) -> Result<AngularFlux> {
        let disc = self.disc;
        let n_cells = disc.n_cells();
        let n_dir = disc.n_dir();
        let data_norm = f.map_or(0.0, |f| disc.norm(f)) + g.map_or(0.0, |g| disc.boundary_norm(g));
        if data_norm == 0.0 {
            return Ok(disc.zero_flux());
        }
        // The residual of 𝒜φ + 𝒞φ − f is isotropic and equals u − σΘφ per cell;
        // its L²(ℛ×𝒮) norm is h times the Euclidean norm over cells.
        let target = self.options.rtol * data_norm / disc.grid().h();

        let mut buf = vec![0.0; n_cells];
        let mut rhs = vec![0.0; n_cells];
        self.scatter_source(None, f, g, transposed, &mut buf, &mut rhs);

        let scattering = self.sigma.iter().any(|&s| s != 0.0);
        let source = if !scattering {
            vec![0.0; n_cells]
        } else {
            match self.options.method {
                ScatteringSolver::SourceIteration => {
                    self.source_iteration(&rhs, target, transposed)?
                }
                ScatteringSolver::Krylov => {
                    let mut inner = vec![0.0; n_cells];
                    let sol = gmres(
                        |u, out| {
                            self.scatter_source(Some(u), None, None, transposed, &mut inner, out);
                            for (o, ui) in out.iter_mut().zip(u) {
                                *o = ui - *o;
                            }
                        },
                        &rhs,
                        None,
                        target,
                        self.options.restart,
                        self.options.max_iter,
                    )?;
                    log::trace!(
                        "transport GMRES: {} iterations, residual {:.3e}",
                        sol.iterations,
                        sol.residual
                    );
                    sol.x
                }
            }
        };

        let mut values = vec![0.0; n_cells * n_dir];
        for k in 0..n_dir {
            self.sweep(k, Some(&source), f, g, transposed, &mut buf);
            for (c, v) in buf.iter().enumerate() {
                values[c * n_dir + k] = *v;
            }
        }
        AngularFlux::from_values(n_cells, n_dir, values)
    }

    fn source_iteration(&self, rhs: &[f64], target: f64, transposed: bool) -> Result<Vec<f64>> {
        let n = rhs.len();
        let mut u = rhs.to_vec();
        let mut next = vec![0.0; n];
        let mut buf = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for it in 1..=self.options.max_iter {
            self.scatter_source(Some(&u), None, None, transposed, &mut buf, &mut next);
            residual = 0.0;
            for i in 0..n {
                next[i] += rhs[i];
                residual += (next[i] - u[i]).powi(2);
            }
            residual = residual.sqrt();
            std::mem::swap(&mut u, &mut next);
            if residual <= target {
                log::trace!("source iteration: {it} sweeps, residual {residual:.3e}");
                return Ok(u);
            }
        }
        Err(Error::NotConverged {
            solver: "source iteration",
            iterations: self.options.max_iter,
            residual,
            target,
        })
    }

    /// Solves `𝒜φ + 𝒞φ = f` in ℛ×𝒮 with `φ = g` on Γ₋.
    pub fn solve(&self, f: Option<&AngularFlux>, g: Option<&BoundaryData>) -> Result<AngularFlux> {
        if let Some(f) = f {
            f.check_shape(self.disc.n_cells(), self.disc.n_dir())?;
        }
        if let Some(g) = g {
            check_boundary(self.disc, g, FlowSide::Inflow)?;
        }
        self.solve_impl(f, g, false)
    }

    /// Solves the transposed system `(𝒜 + 𝒞)ᵀ λ = y` with respect to the
    /// L²(ℛ×𝒮) inner product (downwind sweeps, `λ = 0` on Γ₊).
    pub fn solve_transposed(&self, y: &AngularFlux) -> Result<AngularFlux> {
        y.check_shape(self.disc.n_cells(), self.disc.n_dir())?;
        self.solve_impl(Some(y), None, true)
    }
}

/// Forward solve `𝒜φ + 𝒞(μ,σ)φ = f`, `φ = g` on Γ₋. Missing `f` or `g` means zero.
pub fn solve_forward(
    disc: &Discretization,
    params: &ParameterPair,
    f: Option<&AngularFlux>,
    g: Option<&BoundaryData>,
    options: SolverOptions,
) -> Result<AngularFlux> {
    TransportSolver::new(disc, params, options)?.solve(f, g)
}

/// `𝒜φ + 𝒞φ − f` with inflow `g`.
pub fn forward_residual(
    disc: &Discretization,
    params: &ParameterPair,
    phi: &AngularFlux,
    f: Option<&AngularFlux>,
    g: Option<&BoundaryData>,
) -> Result<AngularFlux> {
    let mut r = apply_transport(disc, phi, g)?;
    let coll = apply_collision(phi, params, disc.quad())?;
    for (i, v) in r.values_mut().iter_mut().enumerate() {
        *v += coll.values()[i] - f.map_or(0.0, |f| f.values()[i]);
    }
    Ok(r)
}

fn check_dirs(phi: &AngularFlux, quad: &AngularQuadrature) -> Result<()> {
    if phi.n_dir() != quad.len() {
        return Err(Error::shape(
            format!("{} directions", quad.len()),
            phi.n_dir(),
        ));
    }
    Ok(())
}

fn check_boundary(disc: &Discretization, g: &BoundaryData, side: FlowSide) -> Result<()> {
    if g.side() != side || g.n_faces() != disc.n_faces() || g.n_dir() != disc.n_dir() {
        return Err(Error::shape(
            format!("{side:?} data on {}x{}", disc.n_faces(), disc.n_dir()),
            format!("{:?} data on {}x{}", g.side(), g.n_faces(), g.n_dir()),
        ));
    }
    Ok(())
}
