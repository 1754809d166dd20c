//! Absorption/scattering fields and their variations.

use crate::error::{Error, Result};

/// Box bounds `0 ≤ μ ≤ mu_max`, `0 ≤ σ ≤ sigma_max` (mm⁻¹).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub mu_max: f64,
    pub sigma_max: f64,
}

impl Bounds {
    pub fn new(mu_max: f64, sigma_max: f64) -> Result<Self> {
        if !(mu_max >= 0.0 && mu_max.is_finite() && sigma_max >= 0.0 && sigma_max.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "bounds must be finite and non-negative, got mu_max={mu_max}, sigma_max={sigma_max}"
            )));
        }
        Ok(Bounds { mu_max, sigma_max })
    }
}

/// Cell-wise `(μ, σ)` inside the admissible box.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPair {
    mu: Vec<f64>,
    sigma: Vec<f64>,
    bounds: Bounds,
}

impl ParameterPair {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>, bounds: Bounds) -> Result<Self> {
        if mu.len() != sigma.len() {
            return Err(Error::shape(
                format!("{} sigma values", mu.len()),
                sigma.len(),
            ));
        }
        let bad_mu = mu.iter().position(|&m| !(0.0..=bounds.mu_max).contains(&m));
        if let Some(c) = bad_mu {
            return Err(Error::InvalidParameters(format!(
                "mu[{c}] = {} outside [0, {}]",
                mu[c], bounds.mu_max
            )));
        }
        let bad_sigma = sigma
            .iter()
            .position(|&s| !(0.0..=bounds.sigma_max).contains(&s));
        if let Some(c) = bad_sigma {
            return Err(Error::InvalidParameters(format!(
                "sigma[{c}] = {} outside [0, {}]",
                sigma[c], bounds.sigma_max
            )));
        }
        Ok(ParameterPair { mu, sigma, bounds })
    }

    pub fn constant(n_cells: usize, mu: f64, sigma: f64, bounds: Bounds) -> Result<Self> {
        Self::new(vec![mu; n_cells], vec![sigma; n_cells], bounds)
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// `[μ; σ]` as one vector.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.mu.clone();
        v.extend_from_slice(&self.sigma);
        v
    }

    /// The same values viewed as an unconstrained field.
    pub fn as_variation(&self) -> ParameterVariation {
        ParameterVariation {
            mu: self.mu.clone(),
            sigma: self.sigma.clone(),
        }
    }

    /// `self + t·var`, which must stay admissible.
    pub fn perturbed(&self, var: &ParameterVariation, t: f64) -> Result<Self> {
        let moved = self.as_variation().axpy(t, var);
        Self::new(moved.mu, moved.sigma, self.bounds)
    }
}

/// Unconstrained per-cell pair, used for variations, gradients and raw
/// (unprojected) iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVariation {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl ParameterVariation {
    pub fn zeros(n_cells: usize) -> Self {
        ParameterVariation {
            mu: vec![0.0; n_cells],
            sigma: vec![0.0; n_cells],
        }
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn from_vec(v: &[f64]) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::shape("even length", v.len()));
        }
        let (mu, sigma) = v.split_at(v.len() / 2);
        Ok(ParameterVariation {
            mu: mu.to_vec(),
            sigma: sigma.to_vec(),
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.mu.clone();
        v.extend_from_slice(&self.sigma);
        v
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ParameterVariation {
            mu: self.mu.iter().map(|m| m * factor).collect(),
            sigma: self.sigma.iter().map(|s| s * factor).collect(),
        }
    }

    /// `self + t·other`.
    pub fn axpy(&self, t: f64, other: &ParameterVariation) -> Self {
        ParameterVariation {
            mu: self
                .mu
                .iter()
                .zip(&other.mu)
                .map(|(a, b)| a + t * b)
                .collect(),
            sigma: self
                .sigma
                .iter()
                .zip(&other.sigma)
                .map(|(a, b)| a + t * b)
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.mu.iter().chain(&self.sigma).all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_is_enforced() {
        let b = Bounds::new(0.04, 30.0).unwrap();
        assert!(ParameterPair::new(vec![0.01, 0.04], vec![5.0, 30.0], b).is_ok());
        assert!(ParameterPair::new(vec![-0.01, 0.0], vec![5.0, 5.0], b).is_err());
        assert!(ParameterPair::new(vec![0.0, 0.0], vec![5.0, 31.0], b).is_err());
        assert!(ParameterPair::new(vec![f64::NAN], vec![5.0], b).is_err());
        assert!(ParameterPair::new(vec![0.0], vec![5.0, 1.0], b).is_err());
        assert!(Bounds::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn zero_bounds_allow_pure_streaming() {
        let b = Bounds::new(0.0, 0.0).unwrap();
        assert!(ParameterPair::constant(3, 0.0, 0.0, b).is_ok());
    }

    #[test]
    fn flat_layout_round_trips() {
        let v = ParameterVariation {
            mu: vec![1.0, 2.0],
            sigma: vec![3.0, 4.0],
        };
        assert_eq!(v.to_vec(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ParameterVariation::from_vec(&v.to_vec()).unwrap(), v);
        assert!(ParameterVariation::from_vec(&[1.0]).is_err());
    }
}
