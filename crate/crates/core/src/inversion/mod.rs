//! Tikhonov-regularized reconstruction of `(μ, σ)` by a projected
//! Gauss–Newton iteration with a decreasing regularization schedule.
//!
//! The functional is
//!
//! ```text
//! Φ_α(x) = ‖F(x) − ℳ‖² + α ‖x − x₀‖²_{H¹}
//! ```
//!
//! with `x = [μ; σ]` and `F` the measurement map. Each outer step solves the
//! linearized normal equations
//!
//! ```text
//! (JᵀJ + α G) δ = Jᵀ(ℳ − F(x_n)) + α G (x₀ − x_n)
//! ```
//!
//! by conjugate gradients preconditioned with `G⁻¹` and then clips
//! `x_n + δ` onto the admissible box.

mod h1;

pub use h1::H1Metric;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::krylov::{norm2, preconditioned_cg};
use crate::measurement::{DenseMatrix, MeasurementSetup};
use crate::params::{Bounds, ParameterPair, ParameterVariation};

/// A differentiable map from `[μ; σ]` to a data vector.
pub trait ForwardModel: Sync {
    fn n_cells(&self) -> usize;

    fn n_data(&self) -> usize;

    fn evaluate(&self, x: &ParameterPair) -> Result<Vec<f64>>;

    /// Data and the `n_data × 2·n_cells` Jacobian with respect to `[μ; σ]`.
    fn linearize(&self, x: &ParameterPair) -> Result<(Vec<f64>, DenseMatrix)>;
}

impl ForwardModel for MeasurementSetup {
    fn n_cells(&self) -> usize {
        self.discretization().n_cells()
    }

    fn n_data(&self) -> usize {
        self.n_measurements()
    }

    fn evaluate(&self, x: &ParameterPair) -> Result<Vec<f64>> {
        Ok(self.measure(x)?.entries().to_vec())
    }

    fn linearize(&self, x: &ParameterPair) -> Result<(Vec<f64>, DenseMatrix)> {
        let (m, jac) = self.measure_with_jacobian(x)?;
        Ok((m.entries().to_vec(), jac))
    }
}

/// `F(x) = A x + b`, used as a closed-form test model.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineModel {
    matrix: DenseMatrix,
    offset: Vec<f64>,
}

impl AffineModel {
    pub fn new(matrix: DenseMatrix, offset: Vec<f64>) -> Result<Self> {
        if !matrix.cols().is_multiple_of(2) {
            return Err(Error::shape("an even number of columns", matrix.cols()));
        }
        if offset.len() != matrix.rows() {
            return Err(Error::shape(matrix.rows(), offset.len()));
        }
        Ok(AffineModel { matrix, offset })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl ForwardModel for AffineModel {
    fn n_cells(&self) -> usize {
        self.matrix.cols() / 2
    }

    fn n_data(&self) -> usize {
        self.matrix.rows()
    }

    fn evaluate(&self, x: &ParameterPair) -> Result<Vec<f64>> {
        let mut y = self.matrix.mul_vec(&x.to_vec());
        for (v, b) in y.iter_mut().zip(&self.offset) {
            *v += b;
        }
        Ok(y)
    }

    fn linearize(&self, x: &ParameterPair) -> Result<(Vec<f64>, DenseMatrix)> {
        Ok((self.evaluate(x)?, self.matrix.clone()))
    }
}

/// Iteration controls for [`TikhonovProblem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgnOptions {
    pub alpha0: f64,
    pub alpha_min: f64,
    pub cg_tol: f64,
    pub cg_max: usize,
    pub step_tol: f64,
    pub max_outer: usize,
}

impl Default for PgnOptions {
    fn default() -> Self {
        PgnOptions {
            alpha0: 1e-2,
            alpha_min: 1e-10,
            cg_tol: 1e-8,
            cg_max: 500,
            step_tol: 1e-6,
            max_outer: 60,
        }
    }
}

impl PgnOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_min > 0.0 && self.alpha0 > self.alpha_min && self.alpha0.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "need alpha0 > alpha_min > 0, got alpha0={}, alpha_min={}",
                self.alpha0, self.alpha_min
            )));
        }
        if !(self.cg_tol > 0.0 && self.step_tol > 0.0) {
            return Err(Error::InvalidParameters(
                "cg_tol and step_tol must be positive".into(),
            ));
        }
        if self.cg_max == 0 || self.max_outer == 0 {
            return Err(Error::InvalidParameters(
                "cg_max and max_outer must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// `α_n = max(α₀ / 2ⁿ, α_min)`.
pub fn alpha_schedule(n: usize, alpha0: f64, alpha_min: f64) -> f64 {
    let halved = alpha0 * 0.5f64.powi(n.min(i32::MAX as usize) as i32);
    halved.max(alpha_min)
}

/// Clips a raw iterate onto the box. Returns the projection and the number of
/// clipped `μ` and `σ` cells.
pub fn project(raw: &ParameterVariation, bounds: Bounds) -> Result<(ParameterPair, usize, usize)> {
    if !raw.is_finite() {
        return Err(Error::InvalidParameters(
            "cannot project a non-finite iterate".into(),
        ));
    }
    let clip = |v: &[f64], hi: f64| {
        let mut active = 0;
        let out: Vec<f64> = v
            .iter()
            .map(|&x| {
                if x < 0.0 {
                    active += 1;
                    0.0
                } else if x > hi {
                    active += 1;
                    hi
                } else {
                    x
                }
            })
            .collect();
        (out, active)
    };
    let (mu, active_mu) = clip(&raw.mu, bounds.mu_max);
    let (sigma, active_sigma) = clip(&raw.sigma, bounds.sigma_max);
    Ok((
        ParameterPair::new(mu, sigma, bounds)?,
        active_mu,
        active_sigma,
    ))
}

/// One row of the reconstruction log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    pub alpha: f64,
    /// `‖F(x_n) − ℳ‖₂` at the iterate the step starts from.
    pub residual: f64,
    /// `Φ_α(x_n)` with the step's `α`.
    pub tikhonov: f64,
    /// `‖x_{n+1} − x_n‖_{H¹}`.
    pub step_norm: f64,
    pub active_mu: usize,
    pub active_sigma: usize,
    pub cg_iterations: usize,
}

pub const ITERATION_HEADER: &str =
    "n,alpha,residual,tikhonov,step_norm,active_mu,active_sigma,cg_iterations";

pub fn iterations_to_csv(records: &[IterationRecord]) -> String {
    let mut out = String::from(ITERATION_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{},{},{}",
            r.n,
            r.alpha,
            r.residual,
            r.tikhonov,
            r.step_norm,
            r.active_mu,
            r.active_sigma,
            r.cg_iterations
        );
    }
    out
}

/// Result of a single Gauss–Newton step.
#[derive(Debug, Clone)]
pub struct PgnStep {
    /// Unprojected `x_n + δ`.
    pub raw: ParameterVariation,
    pub next: ParameterPair,
    pub record: IterationRecord,
}

/// Outcome of [`TikhonovProblem::run`].
#[derive(Debug, Clone)]
pub struct PgnRun {
    pub solution: ParameterPair,
    pub records: Vec<IterationRecord>,
    /// `‖F(x_final) − ℳ‖₂`.
    pub final_residual: f64,
    /// Whether the step criterion was met at the target `α`.
    pub converged: bool,
}

/// Data, prior and metric of one reconstruction problem.
#[derive(Debug, Clone)]
pub struct TikhonovProblem<'a, M: ForwardModel + ?Sized> {
    model: &'a M,
    metric: &'a H1Metric,
    data: Vec<f64>,
    prior: ParameterPair,
    options: PgnOptions,
}

impl<'a, M: ForwardModel + ?Sized> TikhonovProblem<'a, M> {
    pub fn new(
        model: &'a M,
        metric: &'a H1Metric,
        data: Vec<f64>,
        prior: ParameterPair,
        options: PgnOptions,
    ) -> Result<Self> {
        options.validate()?;
        if data.len() != model.n_data() {
            return Err(Error::shape(model.n_data(), data.len()));
        }
        if prior.len() != model.n_cells() || metric.len() != model.n_cells() {
            return Err(Error::shape(
                format!("{} cells", model.n_cells()),
                format!("prior {} / metric {}", prior.len(), metric.len()),
            ));
        }
        Ok(TikhonovProblem {
            model,
            metric,
            data,
            prior,
            options,
        })
    }

    pub fn options(&self) -> &PgnOptions {
        &self.options
    }

    pub fn prior(&self) -> &ParameterPair {
        &self.prior
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn metric(&self) -> &H1Metric {
        self.metric
    }

    pub fn model(&self) -> &M {
        self.model
    }

    fn misfit(&self, fx: &[f64]) -> Vec<f64> {
        fx.iter().zip(&self.data).map(|(a, b)| a - b).collect()
    }

    fn prior_offset(&self, x: &ParameterPair) -> Vec<f64> {
        x.to_vec()
            .iter()
            .zip(self.prior.to_vec())
            .map(|(a, b)| a - b)
            .collect()
    }

    fn value_from(&self, fx: &[f64], x: &ParameterPair, alpha: f64) -> f64 {
        let r = norm2(&self.misfit(fx));
        r * r
            + alpha
                * self
                    .metric
                    .inner_pair(&self.prior_offset(x), &self.prior_offset(x))
    }

    /// `Φ_α(x)`.
    pub fn value(&self, x: &ParameterPair, alpha: f64) -> Result<f64> {
        let fx = self.model.evaluate(x)?;
        Ok(self.value_from(&fx, x, alpha))
    }

    /// H¹-Riesz representative of `Φ_α′(x)`:
    /// `G⁻¹[2 Jᵀ(F(x) − ℳ)] + 2α (x − x₀)`.
    pub fn gradient(&self, x: &ParameterPair, alpha: f64) -> Result<ParameterVariation> {
        let (fx, jac) = self.model.linearize(x)?;
        let jt_r = jac.mul_transpose_vec(&self.misfit(&fx));
        let twice: Vec<f64> = jt_r.iter().map(|v| 2.0 * v).collect();
        let mut g = self.metric.solve_pair(&twice);
        for (gi, d) in g.iter_mut().zip(self.prior_offset(x)) {
            *gi += 2.0 * alpha * d;
        }
        ParameterVariation::from_vec(&g)
    }

    /// One projected Gauss–Newton step from `x` with weight `alpha`.
    pub fn step(&self, n: usize, x: &ParameterPair, alpha: f64) -> Result<PgnStep> {
        let (fx, jac) = self.model.linearize(x)?;
        let misfit = self.misfit(&fx);
        let residual = norm2(&misfit);
        let offset = self.prior_offset(x);
        let tikhonov = residual * residual + alpha * self.metric.inner_pair(&offset, &offset);

        let mut rhs = jac.mul_transpose_vec(&misfit);
        let g_offset = self.metric.apply_pair(&offset);
        for (r, go) in rhs.iter_mut().zip(&g_offset) {
            *r = -*r - alpha * go;
        }
        let normal = |v: &[f64]| {
            let mut out = jac.mul_transpose_vec(&jac.mul_vec(v));
            let gv = self.metric.apply_pair(v);
            for (o, g) in out.iter_mut().zip(&gv) {
                *o += alpha * g;
            }
            out
        };
        let precondition = |v: &[f64]| self.metric.solve_pair(v);
        let sol = preconditioned_cg(
            normal,
            precondition,
            &rhs,
            self.options.cg_tol,
            self.options.cg_max,
        )?;

        let xv = x.to_vec();
        let raw_vec: Vec<f64> = xv.iter().zip(&sol.x).map(|(a, d)| a + d).collect();
        let raw = ParameterVariation::from_vec(&raw_vec)?;
        let (next, active_mu, active_sigma) = project(&raw, self.prior.bounds())?;
        let moved: Vec<f64> = next.to_vec().iter().zip(&xv).map(|(a, b)| a - b).collect();
        let record = IterationRecord {
            n,
            alpha,
            residual,
            tikhonov,
            step_norm: self.metric.norm_pair(&moved),
            active_mu,
            active_sigma,
            cg_iterations: sol.iterations,
        };
        Ok(PgnStep { raw, next, record })
    }

    /// Runs the iteration from `start` until `α` has decreased to
    /// `alpha_target` and the step is small, or `max_outer` steps are taken.
    pub fn run(&self, start: &ParameterPair, alpha_target: f64) -> Result<PgnRun> {
        self.run_observed(start, alpha_target, |_, _| {})
    }

    /// [`Self::run`] with a callback receiving each record and the new iterate.
    pub fn run_observed(
        &self,
        start: &ParameterPair,
        alpha_target: f64,
        mut observer: impl FnMut(&IterationRecord, &ParameterPair),
    ) -> Result<PgnRun> {
        if !(alpha_target > 0.0 && alpha_target.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "alpha target must be positive, got {alpha_target}"
            )));
        }
        let o = self.options;
        let mut x = start.clone();
        let mut records = Vec::new();
        let mut converged = false;
        for n in 0..o.max_outer {
            let scheduled = alpha_schedule(n, o.alpha0, o.alpha_min);
            let alpha = scheduled.max(alpha_target);
            let reached = scheduled <= alpha_target;
            let step = self.step(n, &x, alpha).map_err(|e| Error::Iteration {
                iteration: n,
                source: Box::new(e),
            })?;
            let size = self.metric.norm_pair(&x.to_vec());
            observer(&step.record, &step.next);
            log::debug!(
                "pgn n={n} alpha={alpha:e} residual={:e} step={:e} cg={}",
                step.record.residual,
                step.record.step_norm,
                step.record.cg_iterations
            );
            records.push(step.record);
            x = step.next;
            if reached && step.record.step_norm <= o.step_tol * (1.0 + size) {
                converged = true;
                break;
            }
        }
        let final_residual = norm2(&self.misfit(&self.model.evaluate(&x)?));
        Ok(PgnRun {
            solution: x,
            records,
            final_residual,
            converged,
        })
    }
}
