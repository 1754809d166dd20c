mod common;

use common::*;
use rtt_core::sensitivity::ForwardLinearization;
use rtt_core::transport::{forward_residual, solve_forward};
use rtt_core::{
    AngularFlux, Bounds, Discretization, ParameterPair, ParameterVariation, SolverOptions,
};

fn tight() -> SolverOptions {
    SolverOptions {
        rtol: 1e-14,
        ..SolverOptions::default()
    }
}

fn bounds() -> Bounds {
    Bounds::new(4.0, 20.0).unwrap()
}

fn base_state(d: &Discretization, seed: u64) -> (ParameterPair, ForwardLinearization<'_>) {
    let mut r = rng(seed);
    let p = random_params(d.n_cells(), &mut r, (0.3, 1.0), (1.0, 4.0), bounds());
    let g = d.inflow_from_fn(|f, k| 1.0 + 0.5 * ((f + 3 * k) as f64).cos());
    let lin = ForwardLinearization::linearize(d, &p, None, Some(&g), tight()).unwrap();
    (p, lin)
}

fn forward(d: &Discretization, p: &ParameterPair) -> AngularFlux {
    let g = d.inflow_from_fn(|f, k| 1.0 + 0.5 * ((f + 3 * k) as f64).cos());
    solve_forward(d, p, None, Some(&g), tight()).unwrap()
}

fn variation_norm(d: &Discretization, v: &ParameterVariation) -> f64 {
    (d.cell_inner(&v.mu, &v.mu) + d.cell_inner(&v.sigma, &v.sigma)).sqrt()
}

#[test]
fn adjoint_identity_on_random_pairs() {
    let d = disc(8, 1.0, 8);
    let (_, lin) = base_state(&d, 1);
    let mut r = rng(2);
    for pair in 0..20 {
        let h = random_variation(d.n_cells(), &mut r, 1.0, 1.0);
        let y = random_flux(&d, &mut r, -1.0, 1.0);
        let lhs = d.inner(&lin.apply_jacobian(&h).unwrap(), &y);
        let g = lin.apply_adjoint(&y).unwrap();
        let rhs = d.cell_inner(&h.mu, &g.mu) + d.cell_inner(&h.sigma, &g.sigma);
        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());
        assert!(rel < 1e-10, "pair {pair}: {lhs} vs {rhs}, rel {rel}");
    }
}

#[test]
fn adjoint_matches_dense_jacobian_transpose_without_scattering() {
    let d = disc(6, 1.0, 8);
    let mut r = rng(3);
    let p = ParameterPair::new(
        random_field(d.n_cells(), &mut r, 0.5, 2.0),
        vec![0.0; d.n_cells()],
        bounds(),
    )
    .unwrap();
    let g = d.inflow_constant(1.0);
    let lin = ForwardLinearization::linearize(&d, &p, None, Some(&g), tight()).unwrap();
    let y = random_flux(&d, &mut r, -1.0, 1.0);
    let adj = lin.apply_adjoint(&y).unwrap();
    let n = d.n_cells();
    let area = d.grid().cell_area();
    let mut sigma_sensitivity = 0.0f64;
    for col in 0..2 * n {
        let mut e = ParameterVariation::zeros(n);
        if col < n {
            e.mu[col] = 1.0;
        } else {
            e.sigma[col - n] = 1.0;
        }
        let column = lin.apply_jacobian(&e).unwrap();
        let entry = d.inner(&column, &y) / area;
        let got = if col < n {
            adj.mu[col]
        } else {
            adj.sigma[col - n]
        };
        assert!(
            (entry - got).abs() <= 1e-10 * entry.abs().max(1e-3),
            "column {col}: {entry} vs {got}"
        );
        if col >= n {
            sigma_sensitivity = sigma_sensitivity.max(got.abs());
        }
    }
    assert!(
        sigma_sensitivity > 1e-4,
        "σ gradient vanished: {sigma_sensitivity}"
    );
}

#[test]
fn base_flux_is_deterministic_and_solves_forward_problem() {
    let d = disc(8, 1.0, 8);
    let (p, a) = base_state(&d, 4);
    let (_, b) = base_state(&d, 4);
    assert_eq!(a.base_flux(), b.base_flux());
    let g = d.inflow_from_fn(|f, k| 1.0 + 0.5 * ((f + 3 * k) as f64).cos());
    let res = forward_residual(&d, &p, a.base_flux(), None, Some(&g))
        .unwrap()
        .max_abs();
    assert!(res < 1e-12, "residual {res}");
}

#[test]
fn jacobian_is_linear_and_hessian_symmetric() {
    let d = disc(8, 1.0, 8);
    let (_, lin) = base_state(&d, 5);
    let mut r = rng(6);
    let a = random_variation(d.n_cells(), &mut r, 1.0, 1.0);
    let b = random_variation(d.n_cells(), &mut r, 1.0, 1.0);
    let w = lin.apply_jacobian(&a).unwrap();
    let w2 = lin.apply_jacobian(&a.scaled(2.0)).unwrap();
    assert!(max_rel_diff(&w2, &w.scaled(2.0)) < 1e-12);
    let hab = lin.apply_hessian(&a, &b).unwrap();
    let hba = lin.apply_hessian(&b, &a).unwrap();
    assert!(max_rel_diff(&hab, &hba) < 1e-12);
    let zero = ParameterVariation::zeros(d.n_cells());
    assert_eq!(lin.apply_hessian(&zero, &b).unwrap().max_abs(), 0.0);
}

/// Remainders `‖S(x+ta) − S(x) − tS′a‖` and the same with `−½t²S″[a,a]`.
fn taylor_remainders(hessian_sign: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let d = disc(10, 1.5, 8);
    let (p, lin) = base_state(&d, 7);
    let mut r = rng(8);
    let a = random_variation(d.n_cells(), &mut r, 0.25, 1.0);
    let base = lin.base_flux().clone();
    let w = lin.apply_jacobian(&a).unwrap();
    let h = lin.apply_hessian(&a, &a).unwrap().scaled(hessian_sign);
    let ts = vec![1e-1, 1e-2, 1e-3, 1e-4];
    let mut first = Vec::new();
    let mut second = Vec::new();
    for &t in &ts {
        let s = forward(&d, &p.perturbed(&a, t).unwrap());
        let lin_rem = s.axpy(-1.0, &base).axpy(-t, &w);
        first.push(d.norm(&lin_rem));
        second.push(d.norm(&lin_rem.axpy(-0.5 * t * t, &h)));
    }
    (ts, first, second)
}

#[test]
fn taylor_remainders_have_second_and_third_order() {
    let (ts, first, second) = taylor_remainders(1.0);
    let s1 = loglog_slope(&ts, &first);
    let s2 = loglog_slope(&ts, &second);
    assert!(
        (s1 - 2.0).abs() <= 0.2,
        "first-order remainder slope {s1}: {first:?}"
    );
    assert!(
        (s2 - 3.0).abs() <= 0.3,
        "second-order remainder slope {s2}: {second:?}"
    );
}

#[test]
fn opposite_hessian_sign_fails_third_order_test() {
    let (ts, _, second) = taylor_remainders(-1.0);
    let s2 = loglog_slope(&ts, &second);
    assert!((s2 - 2.0).abs() < 0.2, "flipped-sign remainder slope {s2}");
}

fn lipschitz_ratio(n: usize, eps: f64) -> f64 {
    let d = disc(n, 1.0, 8);
    let mut r = rng(9);
    let p1 = random_params(d.n_cells(), &mut r, (0.5, 1.5), (1.0, 4.0), bounds());
    let dir = random_variation(d.n_cells(), &mut r, 0.3, 1.0);
    let p2 = p1.perturbed(&dir, eps).unwrap();
    let mut h = random_variation(d.n_cells(), &mut r, 1.0, 1.0);
    h = h.scaled(1.0 / variation_norm(&d, &h));
    let g = d.inflow_constant(1.0);
    let l1 = ForwardLinearization::linearize(&d, &p1, None, Some(&g), tight()).unwrap();
    let l2 = ForwardLinearization::linearize(&d, &p2, None, Some(&g), tight()).unwrap();
    let diff = l1
        .apply_jacobian(&h)
        .unwrap()
        .axpy(-1.0, &l2.apply_jacobian(&h).unwrap());
    d.norm(&diff) / variation_norm(&d, &dir.scaled(eps))
}

#[test]
fn derivative_is_lipschitz_with_stable_constant() {
    let coarse: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&e| lipschitz_ratio(8, e))
        .collect();
    let fine: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&e| lipschitz_ratio(16, e))
        .collect();
    let l_est = coarse.iter().cloned().fold(0.0, f64::max);
    for ratio in coarse.iter().chain(&fine) {
        assert!(ratio.is_finite() && *ratio > 0.0);
    }
    assert!(
        coarse.iter().all(|&q| q <= 2.0 * coarse[2]),
        "ratios {coarse:?}"
    );
    let fine_max = fine.iter().cloned().fold(0.0, f64::max);
    assert!(
        fine_max <= 3.0 * l_est && l_est <= 3.0 * fine_max,
        "{coarse:?} vs {fine:?}"
    );
}
