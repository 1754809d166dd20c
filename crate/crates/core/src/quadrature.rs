//! Discrete ordinates on the unit circle.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Equally spaced directions `θ_k = 2π(k + ½)/N` with weights `1/N`.
///
/// The half-step offset keeps every direction off the grid axes, so both
/// components of `s_k` are nonzero and the upwind side is always well defined.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularQuadrature {
    angles: Vec<f64>,
    directions: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl AngularQuadrature {
    pub fn build(n_dir: usize) -> Result<Self> {
        if n_dir < 4 {
            return Err(Error::InvalidQuadrature(format!(
                "need at least 4 directions, got {n_dir}"
            )));
        }
        if !n_dir.is_multiple_of(2) {
            return Err(Error::InvalidQuadrature(format!(
                "direction count must be even, got {n_dir}"
            )));
        }
        let angles: Vec<f64> = (0..n_dir)
            .map(|k| 2.0 * PI * (k as f64 + 0.5) / n_dir as f64)
            .collect();
        let directions = angles.iter().map(|a| [a.cos(), a.sin()]).collect();
        let weights = vec![1.0 / n_dir as f64; n_dir];
        Ok(AngularQuadrature {
            angles,
            directions,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn direction(&self, k: usize) -> [f64; 2] {
        self.directions[k]
    }

    pub fn directions(&self) -> &[[f64; 2]] {
        &self.directions
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn angle(&self, k: usize) -> f64 {
        self.angles[k]
    }

    /// Index of `-s_k`.
    pub fn opposite(&self, k: usize) -> usize {
        (k + self.len() / 2) % self.len()
    }

    /// Two-column `angle,weight` table, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle,weight\n");
        for (a, w) in self.angles.iter().zip(&self.weights) {
            out.push_str(&format!("{a:?},{w:?}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_directions_are_balanced() {
        let q = AngularQuadrature::build(4).unwrap();
        assert!(q.weights().iter().all(|&w| w == 0.25));
        let mx: f64 = (0..4).map(|k| q.weight(k) * q.direction(k)[0]).sum();
        let my: f64 = (0..4).map(|k| q.weight(k) * q.direction(k)[1]).sum();
        assert!(mx.abs() < 1e-16 && my.abs() < 1e-16);
    }

    #[test]
    fn second_moment_matches_circle_average() {
        let q = AngularQuadrature::build(16).unwrap();
        let m2: f64 = (0..16)
            .map(|k| q.weight(k) * q.direction(k)[0].powi(2))
            .sum();
        assert!((m2 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_odd_and_tiny_counts() {
        assert!(AngularQuadrature::build(5).is_err());
        assert!(AngularQuadrature::build(2).is_err());
        assert!(AngularQuadrature::build(0).is_err());
    }

    #[test]
    fn invariants_hold_for_many_sizes() {
        for n in (4..=64).step_by(2) {
            let q = AngularQuadrature::build(n).unwrap();
            let total: f64 = q.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
            let (mut sx, mut sy) = (0.0, 0.0);
            for k in 0..n {
                let [x, y] = q.direction(k);
                assert!((x.hypot(y) - 1.0).abs() < 1e-15);
                assert!(x != 0.0 && y != 0.0);
                sx += q.weight(k) * x;
                sy += q.weight(k) * y;
                let [ox, oy] = q.direction(q.opposite(k));
                assert!((ox + x).abs() < 1e-14 && (oy + y).abs() < 1e-14);
            }
            assert!(sx.abs() < 1e-14 && sy.abs() < 1e-14);
        }
    }

    #[test]
    fn csv_lists_every_direction() {
        let q = AngularQuadrature::build(6).unwrap();
        let csv = q.to_csv();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows.len(), 7);
        let parsed: f64 = rows[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(parsed, q.angle(0));
    }
}
