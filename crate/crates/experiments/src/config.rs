//! Experiment configuration (TOML).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rtt_core::inversion::{H1Metric, PgnOptions};
use rtt_core::measurement::{DetectorSet, MeasurementSetup, SourceSet};
use rtt_core::{
    AngularQuadrature, Bounds, Discretization, ParameterPair, ScatteringSolver, SolverOptions,
    SpatialGrid,
};
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub grid: GridConfig,
    pub quadrature: QuadratureConfig,
    pub phantom: PhantomConfig,
    pub sources: SourceConfig,
    pub detectors: DetectorConfig,
    pub regularization: RegularizationConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub check: CheckConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Cells per side of the bounding square.
    pub n: usize,
    /// Disk radius in mm.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub n_dir: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    Mu,
    Sigma,
}

/// Disk of constant value; later inclusions overwrite earlier ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inclusion {
    pub coefficient: Coefficient,
    pub center: [f64; 2],
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    pub background_mu: f64,
    pub background_sigma: f64,
    #[serde(default)]
    pub inclusions: Vec<Inclusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub count: usize,
    /// Angle of the first source center (radians).
    #[serde(default)]
    pub offset: f64,
    /// Arc width in radians; defaults to a quarter of the spacing.
    pub width: Option<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub count: usize,
    /// Defaults to half a spacing, interleaving detectors with sources.
    pub offset: Option<f64>,
    pub width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationConfig {
    pub mu0: f64,
    pub sigma0: f64,
    pub mu_max: f64,
    pub sigma_max: f64,
    pub alpha0: f64,
    pub alpha_min: f64,
    pub rate_alphas: Vec<f64>,
    pub alpha_fixed: f64,
    /// Second prior `(μ₀, σ₀)` used to exhibit non-uniqueness in calibration.
    pub alternate_prior: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    Krylov,
    SourceIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub rtol: f64,
    pub max_iter: usize,
    pub method: SolverMethod,
    pub restart: usize,
    pub cg_tol: f64,
    pub cg_max: usize,
    pub step_tol: f64,
    pub max_outer: usize,
    /// Step tolerance of the runs in the rate study.
    pub rate_step_tol: f64,
    pub rate_max_outer: usize,
    /// Step tolerance and iteration cap for the fixed-α reference solution.
    pub reference_step_tol: f64,
    pub reference_max_outer: usize,
    /// Iterations recorded after the restart in the fixed-α study.
    pub pgn_iterations: usize,
    /// Iterations discarded before fitting the geometric ratio.
    pub burn_in: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    /// Test hook: perturbs the adjoint so the consistency check must fail.
    #[serde(default)]
    pub break_adjoint: bool,
}

impl Default for ExperimentConfig {
    /// Desk-scale twin experiment: 32² grid on a 25 mm disk, 16 directions,
    /// 8 sources and 8 interleaved detectors.
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            output_dir: default_output_dir(),
            grid: GridConfig {
                n: 32,
                radius: 25.0,
            },
            quadrature: QuadratureConfig { n_dir: 16 },
            phantom: PhantomConfig {
                background_mu: 0.01,
                background_sigma: 10.0,
                inclusions: vec![
                    Inclusion {
                        coefficient: Coefficient::Mu,
                        center: [8.0, 6.0],
                        radius: 6.0,
                        value: 0.04,
                    },
                    Inclusion {
                        coefficient: Coefficient::Mu,
                        center: [-7.0, -9.0],
                        radius: 5.0,
                        value: 0.005,
                    },
                    Inclusion {
                        coefficient: Coefficient::Sigma,
                        center: [-6.0, 9.0],
                        radius: 6.0,
                        value: 30.0,
                    },
                    Inclusion {
                        coefficient: Coefficient::Sigma,
                        center: [9.0, -7.0],
                        radius: 5.0,
                        value: 5.0,
                    },
                ],
            },
            sources: SourceConfig {
                count: 8,
                offset: 0.0,
                width: None,
                amplitude: 1.0,
            },
            detectors: DetectorConfig {
                count: 8,
                offset: None,
                width: None,
            },
            regularization: RegularizationConfig {
                mu0: 0.015,
                sigma0: 15.0,
                mu_max: 0.1,
                sigma_max: 50.0,
                alpha0: 1e-2,
                alpha_min: 1e-10,
                rate_alphas: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7],
                alpha_fixed: 1e-5,
                alternate_prior: Some([0.02, 20.0]),
            },
            solver: SolverConfig {
                rtol: 1e-10,
                max_iter: 10_000,
                method: SolverMethod::Krylov,
                restart: 200,
                cg_tol: 1e-8,
                cg_max: 500,
                step_tol: 1e-6,
                max_outer: 60,
                rate_step_tol: 1e-10,
                rate_max_outer: 80,
                reference_step_tol: 1e-13,
                reference_max_outer: 200,
                pgn_iterations: 40,
                burn_in: 10,
            },
            check: CheckConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text).map_err(|e| match e {
            ExperimentError::Config { message, .. } => ExperimentError::Config {
                path: Some(path.to_path_buf()),
                message,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ExperimentError::Config {
            path: None,
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|(section, key, message)| {
            let line = find_key_line(text, section, key);
            ExperimentError::Config {
                path: None,
                message: match line {
                    Some(l) => format!("line {l}: {section}.{key}: {message}"),
                    None => format!("{section}.{key}: {message}"),
                },
            }
        })?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Range checks; errors name the offending section and key.
    fn validate(&self) -> std::result::Result<(), (&'static str, &'static str, String)> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        let non_negative = |v: f64| v >= 0.0 && v.is_finite();
        if self.grid.n < 2 {
            return Err((
                "grid",
                "n",
                format!("need at least 2 cells, got {}", self.grid.n),
            ));
        }
        if !positive(self.grid.radius) {
            return Err(("grid", "radius", "must be positive".into()));
        }
        if self.quadrature.n_dir < 2 {
            return Err(("quadrature", "n_dir", "need at least 2 directions".into()));
        }
        let r = &self.regularization;
        if !non_negative(r.mu_max) || !non_negative(r.sigma_max) {
            return Err((
                "regularization",
                "mu_max",
                "bounds must be non-negative".into(),
            ));
        }
        let in_box = |mu: f64, sigma: f64| {
            (0.0..=r.mu_max).contains(&mu) && (0.0..=r.sigma_max).contains(&sigma)
        };
        if !in_box(r.mu0, r.sigma0) {
            return Err((
                "regularization",
                "mu0",
                "prior outside the admissible box".into(),
            ));
        }
        if let Some([m, s]) = r.alternate_prior {
            if !in_box(m, s) {
                return Err((
                    "regularization",
                    "alternate_prior",
                    "prior outside the admissible box".into(),
                ));
            }
        }
        if !(positive(r.alpha_min) && r.alpha0 > r.alpha_min && r.alpha0.is_finite()) {
            return Err((
                "regularization",
                "alpha0",
                "need alpha0 > alpha_min > 0".into(),
            ));
        }
        if !positive(r.alpha_fixed) {
            return Err(("regularization", "alpha_fixed", "must be positive".into()));
        }
        if r.rate_alphas.len() < 2
            || r.rate_alphas.iter().any(|&a| !positive(a))
            || r.rate_alphas.windows(2).any(|w| w[1] >= w[0])
        {
            return Err((
                "regularization",
                "rate_alphas",
                "need at least two positive, strictly decreasing values".into(),
            ));
        }
        let p = &self.phantom;
        if !in_box(p.background_mu, p.background_sigma) {
            return Err((
                "phantom",
                "background_mu",
                "background outside the admissible box".into(),
            ));
        }
        for inc in &p.inclusions {
            let ok = match inc.coefficient {
                Coefficient::Mu => (0.0..=r.mu_max).contains(&inc.value),
                Coefficient::Sigma => (0.0..=r.sigma_max).contains(&inc.value),
            };
            if !ok || !positive(inc.radius) {
                return Err((
                    "phantom",
                    "inclusions",
                    format!(
                        "inclusion at {:?} has value {} or radius {} out of range",
                        inc.center, inc.value, inc.radius
                    ),
                ));
            }
        }
        if self.sources.count == 0 {
            return Err(("sources", "count", "need at least one source".into()));
        }
        if !non_negative(self.sources.amplitude) {
            return Err(("sources", "amplitude", "must be non-negative".into()));
        }
        if self.detectors.count == 0 {
            return Err(("detectors", "count", "need at least one detector".into()));
        }
        for (section, width) in [
            ("sources", self.sources.width),
            ("detectors", self.detectors.width),
        ] {
            if let Some(w) = width {
                if !(positive(w) && w <= 2.0 * PI) {
                    return Err((section, "width", "must lie in (0, 2π]".into()));
                }
            }
        }
        let s = &self.solver;
        for (key, v) in [
            ("rtol", s.rtol),
            ("cg_tol", s.cg_tol),
            ("step_tol", s.step_tol),
            ("rate_step_tol", s.rate_step_tol),
            ("reference_step_tol", s.reference_step_tol),
        ] {
            if !positive(v) {
                return Err(("solver", key, "must be positive".into()));
            }
        }
        for (key, v) in [
            ("max_iter", s.max_iter),
            ("restart", s.restart),
            ("cg_max", s.cg_max),
            ("max_outer", s.max_outer),
            ("rate_max_outer", s.rate_max_outer),
            ("reference_max_outer", s.reference_max_outer),
            ("pgn_iterations", s.pgn_iterations),
        ] {
            if v == 0 {
                return Err(("solver", key, "must be at least 1".into()));
            }
        }
        if s.burn_in + 2 > s.pgn_iterations {
            return Err((
                "solver",
                "burn_in",
                "leaves fewer than two iterations to fit".into(),
            ));
        }
        Ok(())
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::new(self.regularization.mu_max, self.regularization.sigma_max)
            .expect("validated bounds")
    }

    pub fn discretization(&self) -> Result<Discretization> {
        Ok(Discretization::new(
            SpatialGrid::build(self.grid.n, self.grid.radius)?,
            AngularQuadrature::build(self.quadrature.n_dir)?,
        ))
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            rtol: self.solver.rtol,
            max_iter: self.solver.max_iter,
            method: match self.solver.method {
                SolverMethod::Krylov => ScatteringSolver::Krylov,
                SolverMethod::SourceIteration => ScatteringSolver::SourceIteration,
            },
            restart: self.solver.restart,
        }
    }

    pub fn pgn_options(&self) -> PgnOptions {
        PgnOptions {
            alpha0: self.regularization.alpha0,
            alpha_min: self.regularization.alpha_min,
            cg_tol: self.solver.cg_tol,
            cg_max: self.solver.cg_max,
            step_tol: self.solver.step_tol,
            max_outer: self.solver.max_outer,
        }
    }

    pub fn measurement_setup(&self) -> Result<MeasurementSetup> {
        let disc = self.discretization()?;
        let ns = self.sources.count;
        let nd = self.detectors.count;
        let src_width = self.sources.width.unwrap_or(2.0 * PI / ns as f64 / 4.0);
        let det_width = self.detectors.width.unwrap_or(2.0 * PI / nd as f64 / 4.0);
        let det_offset = self.detectors.offset.unwrap_or(PI / nd as f64);
        let sources =
            SourceSet::uniform(ns, self.sources.offset, src_width, self.sources.amplitude)?;
        let detectors = DetectorSet::uniform(nd, det_offset, det_width)?;
        Ok(MeasurementSetup::new(
            disc,
            sources,
            detectors,
            self.solver_options(),
        ))
    }

    pub fn metric(&self, setup: &MeasurementSetup) -> H1Metric {
        H1Metric::new(setup.discretization().grid())
    }

    pub fn prior(&self, n_cells: usize) -> Result<ParameterPair> {
        let r = &self.regularization;
        Ok(ParameterPair::constant(
            n_cells,
            r.mu0,
            r.sigma0,
            self.bounds(),
        )?)
    }

    pub fn alternate_prior(&self, n_cells: usize) -> Result<Option<ParameterPair>> {
        match self.regularization.alternate_prior {
            Some([m, s]) => Ok(Some(ParameterPair::constant(n_cells, m, s, self.bounds())?)),
            None => Ok(None),
        }
    }

    /// Phantom fields sampled at the cell centers.
    pub fn phantom(&self, disc: &Discretization) -> Result<ParameterPair> {
        let p = &self.phantom;
        let grid = disc.grid();
        let mut mu = vec![p.background_mu; grid.num_cells()];
        let mut sigma = vec![p.background_sigma; grid.num_cells()];
        for inc in &p.inclusions {
            let target = match inc.coefficient {
                Coefficient::Mu => &mut mu,
                Coefficient::Sigma => &mut sigma,
            };
            for (c, v) in target.iter_mut().enumerate() {
                let [x, y] = grid.cell_center(c);
                if (x - inc.center[0]).hypot(y - inc.center[1]) < inc.radius {
                    *v = inc.value;
                }
            }
        }
        Ok(ParameterPair::new(mu, sigma, self.bounds())?)
    }
}

/// 1-based line of `key = …` inside `[section]`, if present.
fn find_key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = "";
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim_matches(|c| c == '[' || c == ']').trim();
            if current == format!("{section}.{key}") {
                return Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}
