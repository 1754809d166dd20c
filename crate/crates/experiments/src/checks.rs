//! Self-contained consistency suites: adjoint identity, Taylor remainders,
//! forward accuracy, operator identities, Tikhonov gradient and the affine
//! surrogate. Each returns the measured quantities next to its verdict.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtt_core::inversion::{AffineModel, ForwardModel, H1Metric, PgnOptions, TikhonovProblem};
use rtt_core::measurement::{DenseMatrix, DetectorSet, MeasurementSetup, SourceSet};
use rtt_core::sensitivity::ForwardLinearization;
use rtt_core::transport::{apply_collision, apply_theta, solve_forward};
use rtt_core::{
    AngularFlux, AngularQuadrature, Bounds, Discretization, Neighbor, ParameterPair,
    ParameterVariation, Side, SolverOptions, SpatialGrid,
};

use crate::error::Result;
use crate::study::loglog_slope;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

fn disc(n: usize, radius: f64, n_dir: usize) -> Result<Discretization> {
    Ok(Discretization::new(
        SpatialGrid::build(n, radius)?,
        AngularQuadrature::build(n_dir)?,
    ))
}

fn tight() -> SolverOptions {
    SolverOptions {
        rtol: 1e-14,
        ..SolverOptions::default()
    }
}

fn field(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn flux(rng: &mut ChaCha8Rng, d: &Discretization, lo: f64, hi: f64) -> AngularFlux {
    AngularFlux::from_fn(d.n_cells(), d.n_dir(), |_, _| rng.gen_range(lo..hi))
}

fn variation(rng: &mut ChaCha8Rng, n: usize, mu: f64, sigma: f64) -> ParameterVariation {
    ParameterVariation {
        mu: field(rng, n, -mu, mu),
        sigma: field(rng, n, -sigma, sigma),
    }
}

fn params(
    rng: &mut ChaCha8Rng,
    n: usize,
    mu: (f64, f64),
    sigma: (f64, f64),
    bounds: Bounds,
) -> Result<ParameterPair> {
    Ok(ParameterPair::new(
        field(rng, n, mu.0, mu.1),
        field(rng, n, sigma.0, sigma.1),
        bounds,
    )?)
}

fn smooth_inflow(d: &Discretization) -> rtt_core::BoundaryData {
    d.inflow_from_fn(|f, k| 1.0 + 0.5 * ((f + 3 * k) as f64).cos())
}

/// `⟨S′h, y⟩ = ⟨h, S′*y⟩` for 20 random pairs on an 8×8 grid with 8
/// directions. `broken` scales the adjoint output to provide a negative
/// control.
pub fn adjoint_identity(seed: u64, broken: bool) -> Result<CheckResult> {
    let d = disc(8, 1.0, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = Bounds::new(4.0, 20.0)?;
    let p = params(&mut rng, d.n_cells(), (0.3, 1.0), (1.0, 4.0), bounds)?;
    let lin = ForwardLinearization::linearize(&d, &p, None, Some(&smooth_inflow(&d)), tight())?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let h = variation(&mut rng, d.n_cells(), 1.0, 1.0);
        let y = flux(&mut rng, &d, -1.0, 1.0);
        let lhs = d.inner(&lin.apply_jacobian(&h)?, &y);
        let mut g = lin.apply_adjoint(&y)?;
        if broken {
            g = g.scaled(1.0 + 1e-6);
        }
        let rhs = d.cell_inner(&h.mu, &g.mu) + d.cell_inner(&h.sigma, &g.sigma);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
    }
    Ok(result(
        "adjoint identity",
        worst <= 1e-10,
        format!("worst relative gap {worst:.2e} over 20 pairs (tolerance 1e-10)"),
    ))
}

/// First- and second-order Taylor remainder slopes over `t ∈ {10⁻¹,…,10⁻⁴}`.
pub fn taylor_slopes(seed: u64) -> Result<CheckResult> {
    let d = disc(10, 1.5, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = Bounds::new(4.0, 20.0)?;
    let p = params(&mut rng, d.n_cells(), (0.3, 1.0), (1.0, 4.0), bounds)?;
    let g = smooth_inflow(&d);
    let lin = ForwardLinearization::linearize(&d, &p, None, Some(&g), tight())?;
    let a = variation(&mut rng, d.n_cells(), 0.25, 1.0);
    let w = lin.apply_jacobian(&a)?;
    let h = lin.apply_hessian(&a, &a)?;
    let ts = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut first = Vec::new();
    let mut second = Vec::new();
    for &t in &ts {
        let s = solve_forward(&d, &p.perturbed(&a, t)?, None, Some(&g), tight())?;
        let rem = s.axpy(-1.0, lin.base_flux()).axpy(-t, &w);
        first.push(d.norm(&rem));
        second.push(d.norm(&rem.axpy(-0.5 * t * t, &h)));
    }
    let s1 = loglog_slope(&ts, &first);
    let s2 = loglog_slope(&ts, &second);
    Ok(result(
        "taylor remainders",
        (s1 - 2.0).abs() <= 0.2 && (s2 - 3.0).abs() <= 0.3,
        format!("first-order slope {s1:.3} (2.0 ± 0.2), second-order slope {s2:.3} (3.0 ± 0.3)"),
    ))
}

/// Distance from `r` back to the circle along `-s`.
fn chord(r: [f64; 2], s: [f64; 2], radius: f64) -> f64 {
    let rs = r[0] * s[0] + r[1] * s[1];
    let rr = r[0] * r[0] + r[1] * r[1];
    rs + (rs * rs - rr + radius * radius).sqrt()
}

/// L∞ error against `exp(−μ·chord)` over cells within `0.75 R`.
fn absorption_error(n: usize) -> Result<f64> {
    let radius = 25.0;
    let mu = 0.04;
    let d = disc(n, radius, 16)?;
    let p = ParameterPair::constant(d.n_cells(), mu, 0.0, Bounds::new(0.1, 1.0)?)?;
    let phi = solve_forward(
        &d,
        &p,
        None,
        Some(&d.inflow_constant(1.0)),
        SolverOptions::default(),
    )?;
    let mut err: f64 = 0.0;
    for c in 0..d.n_cells() {
        let r = d.grid().cell_center(c);
        if r[0].hypot(r[1]) > 0.75 * radius {
            continue;
        }
        for k in 0..d.n_dir() {
            let exact = (-mu * chord(r, d.quad().direction(k), radius)).exp();
            err = err.max((phi.get(c, k) - exact).abs());
        }
    }
    Ok(err)
}

/// Upwind system assembled entry by entry, for dense comparison.
fn dense_system(
    d: &Discretization,
    p: &ParameterPair,
    f: &AngularFlux,
    g: &rtt_core::BoundaryData,
) -> (DMatrix<f64>, DVector<f64>) {
    let grid = d.grid();
    let h = grid.h();
    let nd = d.n_dir();
    let n = d.n_cells() * nd;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    for c in 0..d.n_cells() {
        for k in 0..nd {
            let [sx, sy] = d.quad().direction(k);
            let row = c * nd + k;
            a[(row, row)] += (sx.abs() + sy.abs()) / h + p.mu()[c] + p.sigma()[c];
            for j in 0..nd {
                a[(row, c * nd + j)] -= p.sigma()[c] * d.quad().weight(j);
            }
            let up_x = if sx > 0.0 { Side::West } else { Side::East };
            let up_y = if sy > 0.0 { Side::South } else { Side::North };
            for (side, coef) in [(up_x, sx.abs() / h), (up_y, sy.abs() / h)] {
                match grid.neighbor(c, side) {
                    Neighbor::Cell(u) => a[(row, u * nd + k)] -= coef,
                    Neighbor::Boundary(face) => b[row] += coef * g.get(face, k),
                }
            }
            b[row] += f.get(c, k);
        }
    }
    (a, b)
}

/// First-order convergence on the pure-absorption ray case for
/// `n ∈ {16, 32, 64}` and agreement with a dense solve on small instances.
pub fn forward_accuracy(seed: u64) -> Result<CheckResult> {
    let ns = [16usize, 32, 64];
    let errs = ns
        .iter()
        .map(|&n| absorption_error(n))
        .collect::<Result<Vec<f64>>>()?;
    let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let slope = loglog_slope(&hs, &errs);

    let d = disc(6, 1.0, 6)?;
    let unknowns = d.n_cells() * d.n_dir();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let p = params(
            &mut rng,
            d.n_cells(),
            (0.0, 0.5),
            (0.0, 8.0),
            Bounds::new(1.0, 10.0)?,
        )?;
        let f = flux(&mut rng, &d, -1.0, 1.0);
        let g = d.inflow_from_fn(|face, k| (face as f64 - 0.5 * k as f64).cos());
        let (a, b) = dense_system(&d, &p, &f, &g);
        let exact = a.lu().solve(&b).expect("nonsingular upwind system");
        let phi = solve_forward(&d, &p, Some(&f), Some(&g), SolverOptions::default())?;
        let diff = phi
            .values()
            .iter()
            .zip(exact.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        worst = worst.max(diff / exact.amax());
    }
    Ok(result(
        "forward accuracy",
        (slope - 1.0).abs() <= 0.3 && worst <= 1e-8 && unknowns <= 200,
        format!(
            "interior L∞ errors {:.3e} {:.3e} {:.3e}, slope {slope:.3} (1.0 ± 0.3); dense gap {worst:.2e} on {unknowns} unknowns (1e-8)",
            errs[0], errs[1], errs[2]
        ),
    ))
}

/// `Θ² = Θ` bitwise, `⟨𝒞φ, φ⟩ ≥ 0` for 100 random fields, and the maximum
/// principle for source-free problems.
pub fn operator_identities(seed: u64) -> Result<CheckResult> {
    let d = disc(8, 1.0, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut projection = true;
    let mut min_collision = f64::INFINITY;
    for _ in 0..100 {
        let phi = flux(&mut rng, &d, -5.0, 5.0);
        let once = apply_theta(&phi, d.quad())?;
        let twice = apply_theta(&once, d.quad())?;
        projection &= once.values() == twice.values();
        let p = params(
            &mut rng,
            d.n_cells(),
            (0.0, 0.1),
            (0.0, 30.0),
            Bounds::new(0.1, 30.0)?,
        )?;
        let c = apply_collision(&phi, &p, d.quad())?;
        min_collision = min_collision.min(d.inner(&c, &phi));
    }
    let opts = SolverOptions::default();
    let p = params(
        &mut rng,
        d.n_cells(),
        (0.0, 0.5),
        (0.0, 5.0),
        Bounds::new(1.0, 5.0)?,
    )?;
    let g = d.inflow_from_fn(|face, k| 2.0 * ((face * 7 + k) as f64).sin());
    let phi = solve_forward(&d, &p, None, Some(&g), opts)?;
    let excess = phi.max_abs() - g.max_abs();
    let max_principle = excess <= opts.rtol * g.max_abs();
    Ok(result(
        "operator identities",
        projection && min_collision >= 0.0 && max_principle,
        format!(
            "theta idempotent: {projection}; min <Cφ,φ> {min_collision:.3e}; max|φ| − max|g| = {excess:.2e}"
        ),
    ))
}

/// Central differences of the Tikhonov value against `⟨∇Φ, h⟩_{H¹}` at five
/// random admissible points.
pub fn tikhonov_gradient(seed: u64) -> Result<CheckResult> {
    let setup = MeasurementSetup::new(
        disc(10, 5.0, 8)?,
        SourceSet::uniform(4, 0.0, std::f64::consts::PI / 3.0, 1.0)?,
        DetectorSet::uniform(4, std::f64::consts::PI / 4.0, std::f64::consts::PI / 3.0)?,
        tight(),
    );
    let n = setup.n_cells();
    let metric = H1Metric::new(setup.discretization().grid());
    let bounds = Bounds::new(0.1, 50.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = params(&mut rng, n, (0.01, 0.03), (10.0, 20.0), bounds)?;
    let prior = ParameterPair::constant(n, 0.015, 15.0, bounds)?;
    let prob = TikhonovProblem::new(
        &setup,
        &metric,
        setup.evaluate(&truth)?,
        prior,
        PgnOptions::default(),
    )?;
    let alpha = 1e-4;
    let t = 1e-3;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let x = params(&mut rng, n, (0.01, 0.03), (10.0, 20.0), bounds)?;
        let dir = variation(&mut rng, n, 0.002, 1.0);
        let grad = prob.gradient(&x, alpha)?;
        let predicted = metric.inner_pair(&grad.to_vec(), &dir.to_vec());
        let fd = (prob.value(&x.perturbed(&dir, t)?, alpha)?
            - prob.value(&x.perturbed(&dir, -t)?, alpha)?)
            / (2.0 * t);
        worst = worst.max((fd - predicted).abs() / predicted.abs());
    }
    Ok(result(
        "tikhonov gradient",
        worst <= 1e-5,
        format!("worst relative finite-difference gap {worst:.2e} at 5 points (1e-5)"),
    ))
}

/// PGN with an affine forward map against the dense closed-form minimizer.
pub fn affine_surrogate(seed: u64) -> Result<CheckResult> {
    let grid = SpatialGrid::build(6, 1.0)?;
    let metric = H1Metric::new(&grid);
    let n = grid.num_cells();
    let rows = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DenseMatrix::from_row_major(rows, 2 * n, field(&mut rng, rows * 2 * n, -1.0, 1.0))?;
    let model = AffineModel::new(a, field(&mut rng, rows, -0.1, 0.1))?;
    let bounds = Bounds::new(1e6, 1e6)?;
    let x0 = ParameterPair::constant(n, 500.0, 500.0, bounds)?;
    let data: Vec<f64> = model
        .evaluate(&x0)?
        .iter()
        .map(|v| v + rng.gen_range(-0.5..0.5))
        .collect();
    let opts = PgnOptions {
        cg_tol: 1e-13,
        ..PgnOptions::default()
    };
    let prob = TikhonovProblem::new(&model, &metric, data.clone(), x0.clone(), opts)?;

    let am = DMatrix::from_fn(rows, 2 * n, |i, j| model.matrix().get(i, j));
    let mut gram = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        let mut e = vec![0.0; 2 * n];
        e[j] = 1.0;
        for (i, v) in metric.apply_pair(&e).into_iter().enumerate() {
            gram[(i, j)] = v;
        }
    }
    let origin = DVector::from_vec(x0.to_vec());
    let f0 = DVector::from_vec(model.evaluate(&x0)?);
    let mut worst: f64 = 0.0;
    for &alpha in &[1e-1, 1e-2, 1e-3] {
        let lhs = am.transpose() * &am + &gram * alpha;
        let rhs = am.transpose() * (DVector::from_vec(data.clone()) - &f0);
        let delta = lhs.cholesky().expect("SPD normal matrix").solve(&rhs);
        let run = prob.run(&x0, alpha)?;
        let got = DVector::from_vec(run.solution.to_vec());
        worst = worst.max((got - &origin - &delta).norm() / delta.norm());
    }
    Ok(result(
        "affine surrogate",
        worst <= 1e-8,
        format!("worst relative gap to closed form {worst:.2e} over 3 values of alpha (1e-8)"),
    ))
}

/// Runs every suite.
pub fn run_all(seed: u64, break_adjoint: bool) -> Result<Vec<CheckResult>> {
    Ok(vec![
        adjoint_identity(seed, break_adjoint)?,
        taylor_slopes(seed)?,
        forward_accuracy(seed)?,
        operator_identities(seed)?,
        tikhonov_gradient(seed)?,
        affine_surrogate(seed)?,
    ])
}
