mod common;

use std::f64::consts::PI;

use common::*;
use rtt_core::measurement::{
    apply_b, assemble_measurements, DetectorSet, MeasurementMatrix, MeasurementSetup, SourceSet,
};
use rtt_core::transport::{outflow_trace, solve_forward};
use rtt_core::{Bounds, Error, ParameterPair, SolverOptions};

fn setup(n_dir: usize, count: usize) -> MeasurementSetup {
    let width = 2.0 * PI / count as f64 / 4.0;
    MeasurementSetup::new(
        disc(16, 5.0, n_dir),
        SourceSet::uniform(count, 0.0, width, 1.0).unwrap(),
        DetectorSet::uniform(count, PI / count as f64, width).unwrap(),
        SolverOptions {
            rtol: 1e-13,
            ..SolverOptions::default()
        },
    )
}

fn phantom(s: &MeasurementSetup, seed: u64) -> ParameterPair {
    let mut r = rng(seed);
    random_params(
        s.discretization().n_cells(),
        &mut r,
        (0.01, 0.05),
        (1.0, 4.0),
        Bounds::new(0.1, 50.0).unwrap(),
    )
}

/// True when the polar angle `a` lies within `width/2` of `center`.
fn on_arc(a: f64, center: f64, width: f64) -> bool {
    let d = (a - center).sin().atan2((a - center).cos());
    d.abs() <= 0.5 * width
}

#[test]
fn column_matches_standalone_pipeline() {
    let s = setup(8, 16);
    let p = phantom(&s, 1);
    let m = assemble_measurements(&s, &p).unwrap();
    assert_eq!((m.n_detectors(), m.n_sources()), (16, 16));
    let d = s.discretization();
    let faces = d.grid().boundary_faces();
    let width = 2.0 * PI / 16.0 / 4.0;
    let j = 5;
    let src_center = 2.0 * PI * j as f64 / 16.0;
    let g = d.inflow_from_fn(|f, _| {
        if on_arc(faces[f].angle, src_center, width) {
            1.0
        } else {
            0.0
        }
    });
    let phi = solve_forward(d, &p, None, Some(&g), *s.options()).unwrap();
    let b = apply_b(d, &outflow_trace(d, &phi).unwrap()).unwrap();
    for i in 0..16 {
        let det_center = PI / 16.0 + 2.0 * PI * i as f64 / 16.0;
        let reading: f64 = (0..faces.len())
            .filter(|&f| on_arc(faces[f].angle, det_center, width))
            .map(|f| b[f] * faces[f].arc_length)
            .sum();
        let got = m.get(i, j);
        assert!(
            (got - reading).abs() <= 1e-12 * reading.abs().max(1e-12),
            "detector {i}: {got} vs {reading}"
        );
    }
}

#[test]
fn measurements_are_non_negative_and_deterministic() {
    let s = setup(8, 8);
    let p = phantom(&s, 2);
    let a = s.measure(&p).unwrap();
    let b = s.measure(&p).unwrap();
    assert_eq!(a, b);
    assert!(a.entries().iter().all(|&v| v >= 0.0 && v.is_finite()));
}

#[test]
fn observation_is_linear_in_flux() {
    let s = setup(8, 8);
    let d = s.discretization();
    let mut r = rng(3);
    let u = random_flux(d, &mut r, -1.0, 1.0);
    let v = random_flux(d, &mut r, -1.0, 1.0);
    let combo = u.scaled(2.0).axpy(-3.0, &v);
    let du = s.detect(&u).unwrap();
    let dv = s.detect(&v).unwrap();
    let dc = s.detect(&combo).unwrap();
    for i in 0..du.len() {
        let expected = 2.0 * du[i] - 3.0 * dv[i];
        assert!((dc[i] - expected).abs() < 1e-12 * (1.0 + expected.abs()));
    }
}

#[test]
fn save_load_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let s = setup(8, 8);
    let m = s.measure(&phantom(&s, 4)).unwrap();
    let path = dir.path().join("m.csv");
    m.save(&path).unwrap();
    let back = MeasurementMatrix::load(&path, s.fingerprint()).unwrap();
    assert_eq!(back, m);
    for (a, b) in back.entries().iter().zip(m.entries()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }

    let other = setup(12, 8);
    match MeasurementMatrix::load(&path, other.fingerprint()) {
        Err(Error::FingerprintMismatch { .. }) => {}
        r => panic!("expected fingerprint error, got {r:?}"),
    }

    let text = std::fs::read_to_string(&path).unwrap();
    let truncated: Vec<&str> = text.lines().take(text.lines().count() - 1).collect();
    let bad = dir.path().join("short.csv");
    std::fs::write(&bad, truncated.join("\n")).unwrap();
    match MeasurementMatrix::load(&bad, s.fingerprint()) {
        Err(Error::Parse { .. }) => {}
        r => panic!("expected parse error, got {r:?}"),
    }

    match MeasurementMatrix::load(&dir.path().join("missing.csv"), s.fingerprint()) {
        Err(Error::Io { .. }) => {}
        r => panic!("expected io error, got {r:?}"),
    }
}

#[test]
fn jacobian_matches_central_differences() {
    let s = setup(8, 4);
    let p = phantom(&s, 5);
    let (m, jac) = s.measure_with_jacobian(&p).unwrap();
    assert_eq!(m, s.measure(&p).unwrap());
    let n = s.discretization().n_cells();
    let mut r = rng(6);
    let dir = random_variation(n, &mut r, 0.005, 0.5);
    let t = 1e-3;
    let plus = s.measure(&p.perturbed(&dir, t).unwrap()).unwrap();
    let minus = s.measure(&p.perturbed(&dir, -t).unwrap()).unwrap();
    let predicted = jac.mul_vec(&dir.to_vec());
    for row in 0..predicted.len() {
        let fd = (plus.entries()[row] - minus.entries()[row]) / (2.0 * t);
        let scale = predicted.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(
            (fd - predicted[row]).abs() <= 1e-6 * scale,
            "row {row}: {fd} vs {}",
            predicted[row]
        );
    }
}
