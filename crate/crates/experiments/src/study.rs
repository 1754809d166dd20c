//! Twin-data studies: calibration, convergence rates, fixed-α PGN behavior.

use rayon::prelude::*;
use rtt_core::inversion::{H1Metric, IterationRecord, PgnOptions, TikhonovProblem};
use rtt_core::measurement::{MeasurementMatrix, MeasurementSetup};
use rtt_core::ParameterPair;

use crate::config::ExperimentConfig;
use crate::error::Result;

/// Everything the later studies need: setup, metric, phantom and prior.
pub struct Context {
    pub config: ExperimentConfig,
    pub setup: MeasurementSetup,
    pub metric: H1Metric,
    pub prior: ParameterPair,
}

impl Context {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let setup = config.measurement_setup()?;
        let metric = config.metric(&setup);
        let prior = config.prior(setup.discretization().n_cells())?;
        Ok(Context {
            config: config.clone(),
            setup,
            metric,
            prior,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.setup.discretization().n_cells()
    }

    /// `‖a − b‖_{H¹}` over both coefficients.
    pub fn distance(&self, a: &ParameterPair, b: &ParameterPair) -> f64 {
        let d: Vec<f64> = a
            .to_vec()
            .iter()
            .zip(b.to_vec())
            .map(|(x, y)| x - y)
            .collect();
        self.metric.norm_pair(&d)
    }

    fn problem<'a>(
        &'a self,
        data: &MeasurementMatrix,
        prior: &ParameterPair,
        options: PgnOptions,
    ) -> Result<TikhonovProblem<'a, MeasurementSetup>> {
        Ok(TikhonovProblem::new(
            &self.setup,
            &self.metric,
            data.entries().to_vec(),
            prior.clone(),
            options,
        )?)
    }
}

/// Minimizer at the smallest `α` reached from one prior.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub prior: ParameterPair,
    pub solution: ParameterPair,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    /// `‖F(x†) − ℳ‖ / ‖ℳ‖`.
    pub relative_misfit: f64,
}

#[derive(Debug, Clone)]
pub struct Calibration {
    pub phantom: ParameterPair,
    pub phantom_data: MeasurementMatrix,
    pub primary: Reconstruction,
    /// `F(x†)`, the exact data of the later studies.
    pub dagger_data: MeasurementMatrix,
    pub alternate: Option<Reconstruction>,
}

impl Calibration {
    pub fn dagger(&self) -> &ParameterPair {
        &self.primary.solution
    }
}

fn reconstruct(
    ctx: &Context,
    data: &MeasurementMatrix,
    prior: &ParameterPair,
    alpha: f64,
) -> Result<Reconstruction> {
    let prob = ctx.problem(data, prior, ctx.config.pgn_options())?;
    let run = prob.run(prior, alpha)?;
    Ok(Reconstruction {
        prior: prior.clone(),
        relative_misfit: run.final_residual / data.norm(),
        solution: run.solution,
        records: run.records,
        converged: run.converged,
    })
}

/// Generates phantom data and reconstructs `x†` at `α_min`, once from the
/// configured prior and, when configured, once from the alternate prior.
pub fn calibrate(ctx: &Context) -> Result<Calibration> {
    let phantom = ctx.config.phantom(ctx.setup.discretization())?;
    let phantom_data = ctx.setup.measure(&phantom)?;
    let alpha = ctx.config.regularization.alpha_min;
    let alternate_prior = ctx.config.alternate_prior(ctx.n_cells())?;
    let (primary, alternate) = rayon::join(
        || reconstruct(ctx, &phantom_data, &ctx.prior, alpha),
        || {
            alternate_prior
                .as_ref()
                .map(|p| reconstruct(ctx, &phantom_data, p, alpha))
                .transpose()
        },
    );
    let primary = primary?;
    let alternate = alternate?;
    let dagger_data = ctx.setup.measure(&primary.solution)?;
    log::info!(
        "calibration: {} iterations, relative misfit {:.3e}",
        primary.records.len(),
        primary.relative_misfit
    );
    Ok(Calibration {
        phantom,
        phantom_data,
        primary,
        dagger_data,
        alternate,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_slope(&lx, &ly)
}

fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub alpha: f64,
    /// `‖F(x_α) − ℳ†‖₂`.
    pub residual: f64,
    /// `‖x_α − x†‖_{H¹}`.
    pub error: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub residual_slope: f64,
    pub error_slope: f64,
}

impl RateTable {
    /// `err_α` non-increasing as `α` decreases.
    pub fn error_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error <= w[0].error)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# residual_slope {:?}\n# error_slope {:?}\nalpha,residual,error,iterations,converged\n",
            self.residual_slope, self.error_slope
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:?},{:?},{:?},{},{}\n",
                r.alpha, r.residual, r.error, r.iterations, r.converged as u8
            ));
        }
        out
    }
}

/// Reconstructions from exact data `F(x†)` for each configured `α`.
pub fn rate_study(
    ctx: &Context,
    dagger: &ParameterPair,
    data: &MeasurementMatrix,
) -> Result<RateTable> {
    let options = PgnOptions {
        step_tol: ctx.config.solver.rate_step_tol,
        max_outer: ctx.config.solver.rate_max_outer,
        ..ctx.config.pgn_options()
    };
    let prob = ctx.problem(data, &ctx.prior, options)?;
    let rows = ctx
        .config
        .regularization
        .rate_alphas
        .par_iter()
        .map(|&alpha| {
            let run = prob.run(&ctx.prior, alpha)?;
            log::info!(
                "rates: alpha {alpha:e} residual {:.4e} after {} iterations",
                run.final_residual,
                run.records.len()
            );
            Ok(RateRow {
                alpha,
                residual: run.final_residual,
                error: ctx.distance(&run.solution, dagger),
                iterations: run.records.len(),
                converged: run.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let res: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.error).collect();
    Ok(RateTable {
        residual_slope: loglog_slope(&alphas, &res),
        error_slope: loglog_slope(&alphas, &err),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgnRow {
    pub n: usize,
    pub alpha: f64,
    /// `‖F(x_n) − ℳ†‖₂`.
    pub residual: f64,
    /// `‖x_n − x_α‖_{H¹}`.
    pub error: f64,
    pub tikhonov: f64,
}

#[derive(Debug, Clone)]
pub struct PgnStudy {
    pub alpha: f64,
    pub reference: ParameterPair,
    pub reference_iterations: usize,
    pub reference_converged: bool,
    pub rows: Vec<PgnRow>,
    /// Rows used in the ratio fit: after burn-in and above the error floor.
    pub fit_range: (usize, usize),
    /// Geometric ratio of `err_n` fitted on `fit_range`.
    pub ratio: f64,
}

impl PgnStudy {
    fn tail(&self) -> &[PgnRow] {
        &self.rows[self.fit_range.0..self.fit_range.1]
    }

    pub fn error_monotone(&self) -> bool {
        self.tail().windows(2).all(|w| w[1].error <= w[0].error)
    }

    /// `res_n` non-increasing after burn-in, up to relative round-off.
    pub fn residual_monotone(&self) -> bool {
        self.rows[self.fit_range.0..]
            .windows(2)
            .all(|w| w[1].residual <= w[0].residual * (1.0 + 1e-9))
    }

    /// Last recorded residual.
    pub fn residual_floor(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.residual)
    }

    /// The residual has settled at a positive value: the last few iterations
    /// change it by less than 10⁻⁶ relative.
    pub fn residual_stagnates(&self) -> bool {
        let n = self.rows.len();
        if n < 4 {
            return false;
        }
        let floor = self.residual_floor();
        floor > 0.0
            && self.rows[n - 4..]
                .iter()
                .all(|r| (r.residual - floor).abs() <= 1e-6 * floor)
    }

    /// `Φ_α` non-increasing once the schedule has reached `α`.
    pub fn tikhonov_monotone(&self) -> bool {
        let fixed: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.alpha == self.alpha)
            .map(|r| r.tikhonov)
            .collect();
        fixed.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9))
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# alpha {:?}\n# ratio {:?}\n# fit_rows {} {}\nn,alpha,residual,error,tikhonov\n",
            self.alpha, self.ratio, self.fit_range.0, self.fit_range.1
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:?},{:?},{:?},{:?}\n",
                r.n, r.alpha, r.residual, r.error, r.tikhonov
            ));
        }
        out
    }
}

/// Relative error level below which `err_n` is treated as converged to the
/// reference, since the reference itself is only accurate to about this level.
const ERROR_FLOOR: f64 = 1e-11;

/// Computes `x_α` to tight tolerance, then restarts from the prior and records
/// the distance of each iterate to `x_α`.
pub fn pgn_study(ctx: &Context, data: &MeasurementMatrix, alpha: f64) -> Result<PgnStudy> {
    let s = &ctx.config.solver;
    let reference_options = PgnOptions {
        step_tol: s.reference_step_tol,
        max_outer: s.reference_max_outer,
        ..ctx.config.pgn_options()
    };
    let reference = ctx
        .problem(data, &ctx.prior, reference_options)?
        .run(&ctx.prior, alpha)?;
    log::info!(
        "pgn: reference after {} iterations (converged: {})",
        reference.records.len(),
        reference.converged
    );
    let x_alpha = reference.solution;

    let restart_options = PgnOptions {
        step_tol: f64::MIN_POSITIVE,
        max_outer: s.pgn_iterations,
        ..ctx.config.pgn_options()
    };
    let mut iterates = vec![ctx.prior.clone()];
    let run = ctx
        .problem(data, &ctx.prior, restart_options)?
        .run_observed(&ctx.prior, alpha, |_, x| iterates.push(x.clone()))?;
    let rows: Vec<PgnRow> = run
        .records
        .iter()
        .zip(&iterates)
        .map(|(r, x)| PgnRow {
            n: r.n,
            alpha: r.alpha,
            residual: r.residual,
            error: ctx.distance(x, &x_alpha),
            tikhonov: r.tikhonov,
        })
        .collect();

    let floor = ERROR_FLOOR * (1.0 + ctx.metric.norm_pair(&x_alpha.to_vec()));
    let start = s.burn_in.min(rows.len());
    let end = rows[start..]
        .iter()
        .position(|r| r.error <= floor)
        .map_or(rows.len(), |p| start + p);
    let ratio = if end >= start + 2 {
        let ns: Vec<f64> = rows[start..end].iter().map(|r| r.n as f64).collect();
        let le: Vec<f64> = rows[start..end].iter().map(|r| r.error.ln()).collect();
        linear_slope(&ns, &le).exp()
    } else {
        f64::NAN
    };
    Ok(PgnStudy {
        alpha,
        reference: x_alpha,
        reference_iterations: reference.records.len(),
        reference_converged: reference.converged,
        rows,
        fit_range: (start, end),
        ratio,
    })
}
