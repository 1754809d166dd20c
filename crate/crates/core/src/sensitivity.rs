//! First and second derivatives of the parameter-to-solution map `S(μ,σ) = φ`
//! and the adjoint of the first derivative.
//!
//! The discrete forward problem is `L(μ,σ) φ = f + (inflow terms)` with
//! `L = 𝒜₀ + 𝒞(μ,σ)` and `𝒞` linear in the parameters. Differentiating gives,
//! for a variation `h = (μ̂, σ̂)`,
//!
//! ```text
//! L w       = −𝒞(h) φ                       (w = S′h, w = 0 on Γ₋)
//! L H       = −𝒞(a) w_b − 𝒞(b) w_a          (H = S″[a, b], H = 0 on Γ₋)
//! ```
//!
//! The adjoint is obtained by transposing the discrete operators: with the
//! costate `λ = L⁻ᵀ y`,
//!
//! ```text
//! g_μ(c) = −Σ_k w_k φ(c,k) λ(c,k)
//! g_σ(c) = −Σ_k w_k (φ − Θφ)(c,k) λ(c,k)
//! ```
//!
//! so that `(S′h, y)_{L²(ℛ×𝒮)} = (h, (g_μ, g_σ))_{L²(ℛ)}` up to solver tolerance.

use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::flux::{AngularFlux, BoundaryData};
use crate::params::{ParameterPair, ParameterVariation};
use crate::transport::{collision_with, scalar_flux, SolverOptions, TransportSolver};

/// Frozen state `(μ, σ, φ)` plus the solver for `𝒜 + 𝒞(μ,σ)` and its transpose.
#[derive(Debug, Clone)]
pub struct ForwardLinearization<'a> {
    solver: TransportSolver<'a>,
    params: ParameterPair,
    base_flux: AngularFlux,
    base_average: Vec<f64>,
}

impl<'a> ForwardLinearization<'a> {
    /// Solves the forward problem at `params` and keeps the state for
    /// derivative applications.
    pub fn linearize(
        disc: &'a Discretization,
        params: &ParameterPair,
        f: Option<&AngularFlux>,
        g: Option<&BoundaryData>,
        options: SolverOptions,
    ) -> Result<Self> {
        let solver = TransportSolver::new(disc, params, options)?;
        let base_flux = solver.solve(f, g)?;
        Ok(Self::from_solution(solver, params.clone(), base_flux))
    }

    /// Wraps an already computed forward solution `φ = S(params)`.
    pub fn from_solution(
        solver: TransportSolver<'a>,
        params: ParameterPair,
        base_flux: AngularFlux,
    ) -> Self {
        let base_average = scalar_flux(&base_flux, solver.discretization().quad());
        ForwardLinearization {
            solver,
            params,
            base_flux,
            base_average,
        }
    }

    pub fn base_params(&self) -> &ParameterPair {
        &self.params
    }

    pub fn base_flux(&self) -> &AngularFlux {
        &self.base_flux
    }

    pub fn solver(&self) -> &TransportSolver<'a> {
        &self.solver
    }

    fn disc(&self) -> &'a Discretization {
        self.solver.discretization()
    }

    fn check_variation(&self, var: &ParameterVariation) -> Result<()> {
        let n = self.disc().n_cells();
        if var.mu.len() != n || var.sigma.len() != n {
            return Err(Error::shape(
                format!("{n} cell variations"),
                format!("mu {} / sigma {}", var.mu.len(), var.sigma.len()),
            ));
        }
        Ok(())
    }

    /// `w = S′(μ,σ)[μ̂, σ̂]`.
    pub fn apply_jacobian(&self, var: &ParameterVariation) -> Result<AngularFlux> {
        self.check_variation(var)?;
        let rhs =
            collision_with(&self.base_flux, &var.mu, &var.sigma, self.disc().quad())?.scaled(-1.0);
        self.solver.solve(Some(&rhs), None)
    }

    /// Costate `λ` solving the transposed system with source `y`.
    pub fn solve_costate(&self, y: &AngularFlux) -> Result<AngularFlux> {
        self.solver.solve_transposed(y)
    }

    /// Parameter gradient from a costate computed by [`Self::solve_costate`].
    pub fn adjoint_from_costate(&self, costate: &AngularFlux) -> ParameterVariation {
        let w = self.disc().quad().weights();
        let n_cells = self.disc().n_cells();
        let mut out = ParameterVariation::zeros(n_cells);
        for c in 0..n_cells {
            let phi = self.base_flux.cell(c);
            let lam = costate.cell(c);
            let avg = self.base_average[c];
            let mut gm = 0.0;
            let mut gs = 0.0;
            for k in 0..w.len() {
                gm += w[k] * phi[k] * lam[k];
                gs += w[k] * (phi[k] - avg) * lam[k];
            }
            out.mu[c] = -gm;
            out.sigma[c] = -gs;
        }
        out
    }

    /// `S′(μ,σ)* y` with respect to L²(ℛ×𝒮) and L²(ℛ)×L²(ℛ).
    pub fn apply_adjoint(&self, y: &AngularFlux) -> Result<ParameterVariation> {
        let costate = self.solve_costate(y)?;
        Ok(self.adjoint_from_costate(&costate))
    }

    /// `H = S″(μ,σ)[a, b]`.
    pub fn apply_hessian(
        &self,
        a: &ParameterVariation,
        b: &ParameterVariation,
    ) -> Result<AngularFlux> {
        self.check_variation(a)?;
        self.check_variation(b)?;
        let quad = self.disc().quad();
        let wa = self.apply_jacobian(a)?;
        let wb = if a == b {
            wa.clone()
        } else {
            self.apply_jacobian(b)?
        };
        let ca = collision_with(&wb, &a.mu, &a.sigma, quad)?;
        let cb = collision_with(&wa, &b.mu, &b.sigma, quad)?;
        let rhs = ca.axpy(1.0, &cb).scaled(-1.0);
        self.solver.solve(Some(&rhs), None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;
    use crate::params::Bounds;
    use crate::quadrature::AngularQuadrature;

    fn disc() -> Discretization {
        Discretization::new(
            SpatialGrid::build(6, 1.0).unwrap(),
            AngularQuadrature::build(8).unwrap(),
        )
    }

    fn variation(n: usize, seed: f64) -> ParameterVariation {
        ParameterVariation {
            mu: (0..n).map(|c| (c as f64 * 0.7 + seed).sin()).collect(),
            sigma: (0..n).map(|c| (c as f64 * 1.3 - seed).cos()).collect(),
        }
    }

    #[test]
    fn streaming_base_state_is_unit() {
        let d = disc();
        let p =
            ParameterPair::constant(d.n_cells(), 0.0, 0.0, Bounds::new(1.0, 1.0).unwrap()).unwrap();
        let g = d.inflow_constant(1.0);
        let lin = ForwardLinearization::linearize(&d, &p, None, Some(&g), SolverOptions::default())
            .unwrap();
        assert!(lin
            .base_flux()
            .values()
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn zero_inputs_give_zero_outputs() {
        let d = disc();
        let p =
            ParameterPair::constant(d.n_cells(), 0.3, 1.0, Bounds::new(1.0, 2.0).unwrap()).unwrap();
        let g = d.inflow_constant(1.0);
        let lin = ForwardLinearization::linearize(&d, &p, None, Some(&g), SolverOptions::default())
            .unwrap();
        let zero = ParameterVariation::zeros(d.n_cells());
        assert_eq!(lin.apply_jacobian(&zero).unwrap().max_abs(), 0.0);
        let a = variation(d.n_cells(), 0.2);
        assert_eq!(lin.apply_hessian(&zero, &a).unwrap().max_abs(), 0.0);
        let adj = lin.apply_adjoint(&d.zero_flux()).unwrap();
        assert!(adj.mu.iter().chain(&adj.sigma).all(|&v| v == 0.0));
    }

    #[test]
    fn jacobian_is_linear_and_hessian_symmetric() {
        let d = disc();
        let p =
            ParameterPair::constant(d.n_cells(), 0.3, 1.0, Bounds::new(1.0, 2.0).unwrap()).unwrap();
        let g = d.inflow_constant(1.0);
        let lin = ForwardLinearization::linearize(&d, &p, None, Some(&g), SolverOptions::default())
            .unwrap();
        let a = variation(d.n_cells(), 0.2);
        let b = variation(d.n_cells(), 1.1);
        let w1 = lin.apply_jacobian(&a).unwrap();
        let w2 = lin.apply_jacobian(&a.scaled(2.0)).unwrap();
        let diff = w2.axpy(-2.0, &w1).max_abs();
        assert!(diff <= 1e-9 * w1.max_abs(), "diff {diff}");
        let hab = lin.apply_hessian(&a, &b).unwrap();
        let hba = lin.apply_hessian(&b, &a).unwrap();
        assert!(hab.axpy(-1.0, &hba).max_abs() <= 1e-9 * hab.max_abs());
    }

    #[test]
    fn rejects_wrong_variation_length() {
        let d = disc();
        let p =
            ParameterPair::constant(d.n_cells(), 0.3, 1.0, Bounds::new(1.0, 2.0).unwrap()).unwrap();
        let lin = ForwardLinearization::linearize(
            &d,
            &p,
            None,
            Some(&d.inflow_constant(1.0)),
            SolverOptions::default(),
        )
        .unwrap();
        assert!(lin.apply_jacobian(&ParameterVariation::zeros(3)).is_err());
    }
}
