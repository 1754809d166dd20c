//! Stationary radiative transfer on a 2D disk and reconstruction of absorption
//! and scattering coefficients from boundary outflow data.
//!
//! The crate is organized bottom-up:
//!
//! - [`grid`], [`quadrature`], [`discretization`]: phase-space discretization.
//! - [`transport`]: the operators 𝒜, Θ, 𝒞 and the forward solver.
//! - [`sensitivity`]: derivative, adjoint and Hessian of the parameter-to-solution map.
//! - [`measurement`]: outflow observation, detectors, and the measurement matrix.
//! - [`inversion`]: H¹-Tikhonov functional and the projected Gauss-Newton method.

pub mod csv;
pub mod discretization;
pub mod error;
pub mod flux;
pub mod grid;
pub mod inversion;
pub mod krylov;
pub mod measurement;
pub mod params;
pub mod quadrature;
pub mod sensitivity;
pub mod transport;

pub use discretization::Discretization;
pub use error::{Error, Result};
pub use flux::{AngularFlux, BoundaryData, FlowSide};
pub use grid::{BoundaryFace, Neighbor, Side, SpatialGrid};
pub use params::{Bounds, ParameterPair, ParameterVariation};
pub use quadrature::AngularQuadrature;
pub use transport::{ScatteringSolver, SolverOptions, TransportSolver};
