//! Boundary observation, source/detector geometry and the measurement matrix.
//!
//! A measurement `ℳ_ij` integrates the outflow density `Bφ_j` of the field
//! generated by source `j` over the arc of detector `i`. Faces belong to an
//! arc when their center angle falls inside it; each contributes its
//! projected arc length.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::csv;
use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::flux::{AngularFlux, BoundaryData, FlowSide};
use crate::params::ParameterPair;
use crate::sensitivity::ForwardLinearization;
use crate::transport::{outflow_trace, SolverOptions, TransportSolver};

/// Arc of the boundary circle, `center_angle ± width/2` (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryArc {
    pub center_angle: f64,
    pub width: f64,
}

impl BoundaryArc {
    pub fn new(center_angle: f64, width: f64) -> Result<Self> {
        if !(center_angle.is_finite() && width > 0.0 && width <= 2.0 * PI) {
            return Err(Error::InvalidParameters(format!(
                "arc width must lie in (0, 2π], got {width} at {center_angle}"
            )));
        }
        Ok(BoundaryArc {
            center_angle,
            width,
        })
    }

    pub fn contains(&self, angle: f64) -> bool {
        if self.width >= 2.0 * PI {
            return true;
        }
        let d = (angle - self.center_angle + PI).rem_euclid(2.0 * PI) - PI;
        d.abs() <= 0.5 * self.width
    }

    /// `count` arcs of equal width with centers `offset + 2πi/count`.
    pub fn uniform(count: usize, offset: f64, width: f64) -> Result<Vec<BoundaryArc>> {
        (0..count)
            .map(|i| BoundaryArc::new(offset + 2.0 * PI * i as f64 / count as f64, width))
            .collect()
    }
}

/// Isotropic inflow of constant amplitude over an arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub arc: BoundaryArc,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSet {
    sources: Vec<Source>,
}

impl SourceSet {
    pub fn new(sources: Vec<Source>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::InvalidParameters("need at least one source".into()));
        }
        if let Some(s) = sources.iter().find(|s| !s.amplitude.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "source amplitude {} is not finite",
                s.amplitude
            )));
        }
        Ok(SourceSet { sources })
    }

    pub fn uniform(count: usize, offset: f64, width: f64, amplitude: f64) -> Result<Self> {
        Self::new(
            BoundaryArc::uniform(count, offset, width)?
                .into_iter()
                .map(|arc| Source { arc, amplitude })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSet {
    arcs: Vec<BoundaryArc>,
}

impl DetectorSet {
    pub fn new(arcs: Vec<BoundaryArc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::InvalidParameters(
                "need at least one detector".into(),
            ));
        }
        Ok(DetectorSet { arcs })
    }

    pub fn uniform(count: usize, offset: f64, width: f64) -> Result<Self> {
        Self::new(BoundaryArc::uniform(count, offset, width)?)
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn arcs(&self) -> &[BoundaryArc] {
        &self.arcs
    }
}

/// Outflow density `Bφ` per boundary face: `Σ_{s_k·n>0} w_k (s_k·n) φ(face, k)`.
pub fn apply_b(disc: &Discretization, trace: &BoundaryData) -> Result<Vec<f64>> {
    if trace.side() != FlowSide::Outflow
        || trace.n_faces() != disc.n_faces()
        || trace.n_dir() != disc.n_dir()
    {
        return Err(Error::shape(
            format!("outflow data on {}x{}", disc.n_faces(), disc.n_dir()),
            format!(
                "{:?} data on {}x{}",
                trace.side(),
                trace.n_faces(),
                trace.n_dir()
            ),
        ));
    }
    let quad = disc.quad();
    Ok((0..disc.n_faces())
        .map(|f| {
            (0..disc.n_dir())
                .filter_map(|k| {
                    let c = disc.face_cos(f, k);
                    (c > 0.0).then(|| quad.weight(k) * c * trace.get(f, k))
                })
                .sum()
        })
        .collect())
}

/// Faces whose centers fall in the arc.
pub fn faces_in_arc(disc: &Discretization, arc: &BoundaryArc) -> Vec<usize> {
    let faces = disc.grid().boundary_faces();
    (0..faces.len())
        .filter(|&f| arc.contains(faces[f].angle))
        .collect()
}

fn warn_on_coverage(disc: &Discretization, kind: &str, arc: &BoundaryArc) {
    if faces_in_arc(disc, arc).is_empty() {
        log::warn!(
            "{kind} arc at {:.4} rad (width {:.4}) captures no boundary faces",
            arc.center_angle,
            arc.width
        );
    } else if arc.width * disc.grid().radius() < 2.0 * disc.grid().h() {
        log::warn!(
            "{kind} arc at {:.4} rad is narrower than two cell widths",
            arc.center_angle
        );
    }
}

/// `∫_Σ b dr`: sum of face values times arc length over faces in the arc.
pub fn integrate_detector(disc: &Discretization, b: &[f64], arc: &BoundaryArc) -> f64 {
    let faces = disc.grid().boundary_faces();
    faces_in_arc(disc, arc)
        .into_iter()
        .map(|f| b[f] * faces[f].arc_length)
        .sum()
}

/// Inflow data of one source: its amplitude on every inflow pair of the faces
/// in its arc, zero elsewhere.
pub fn source_inflow(disc: &Discretization, source: &Source) -> BoundaryData {
    let mut member = vec![false; disc.n_faces()];
    for f in faces_in_arc(disc, &source.arc) {
        member[f] = true;
    }
    disc.inflow_from_fn(|f, _| if member[f] { source.amplitude } else { 0.0 })
}

/// Riesz representer `y` of the detector functional: `(φ, y)_{L²(ℛ×𝒮)}`
/// equals `integrate_detector(B · outflow_trace(φ))` for every `φ`.
pub fn detector_representer(disc: &Discretization, arc: &BoundaryArc) -> AngularFlux {
    let faces = disc.grid().boundary_faces();
    let area = disc.grid().cell_area();
    let mut y = disc.zero_flux();
    for f in faces_in_arc(disc, arc) {
        let face = &faces[f];
        for k in 0..disc.n_dir() {
            let c = disc.face_cos(f, k);
            if c > 0.0 {
                // w_k cancels against the quadrature weight of the inner product.
                let v = y.get(face.cell, k) + face.arc_length * c / area;
                y.set(face.cell, k, v);
            }
        }
    }
    y
}

/// Detector × source outflow data plus the fingerprint of the geometry that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    n_detectors: usize,
    n_sources: usize,
    entries: Vec<f64>,
    fingerprint: String,
}

impl MeasurementMatrix {
    pub fn new(
        n_detectors: usize,
        n_sources: usize,
        entries: Vec<f64>,
        fingerprint: impl Into<String>,
    ) -> Result<Self> {
        if entries.len() != n_detectors * n_sources {
            return Err(Error::shape(
                format!("{n_detectors}x{n_sources} entries"),
                entries.len(),
            ));
        }
        Ok(MeasurementMatrix {
            n_detectors,
            n_sources,
            entries,
            fingerprint: fingerprint.into(),
        })
    }

    pub fn n_detectors(&self) -> usize {
        self.n_detectors
    }

    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    /// `ℳ_ij` for detector `i`, source `j`.
    pub fn get(&self, detector: usize, source: usize) -> f64 {
        self.entries[detector * self.n_sources + source]
    }

    /// Entries flattened detector-major.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn column(&self, source: usize) -> Vec<f64> {
        (0..self.n_detectors).map(|i| self.get(i, source)).collect()
    }

    /// Euclidean norm over all entries.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖self − other‖₂` over entries.
    pub fn distance(&self, other: &MeasurementMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_csv(&self) -> String {
        csv::format_rows(&self.header(), &self.rows())
    }

    fn header(&self) -> Vec<String> {
        vec![
            format!("fingerprint {}", self.fingerprint),
            format!("detectors {} sources {}", self.n_detectors, self.n_sources),
        ]
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.n_sources)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        csv::write_matrix(path, &self.header(), &self.rows())
    }

    /// Reads a saved matrix and checks it against the expected fingerprint.
    pub fn load(path: &Path, expected_fingerprint: &str) -> Result<Self> {
        let m = Self::load_unchecked(path)?;
        if m.fingerprint != expected_fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: expected_fingerprint.to_string(),
                found: m.fingerprint,
            });
        }
        Ok(m)
    }

    pub fn load_unchecked(path: &Path) -> Result<Self> {
        let table = csv::read_matrix(path)?;
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let fingerprint = table
            .comments
            .iter()
            .find_map(|c| c.strip_prefix("fingerprint ").map(str::to_string))
            .ok_or_else(|| parse_err(1, "missing fingerprint header".into()))?;
        let dims = table
            .comments
            .iter()
            .find_map(|c| {
                let mut it = c.split_whitespace();
                match (it.next(), it.next(), it.next(), it.next()) {
                    (Some("detectors"), Some(d), Some("sources"), Some(s)) => {
                        Some((d.parse::<usize>().ok()?, s.parse::<usize>().ok()?))
                    }
                    _ => None,
                }
            })
            .ok_or_else(|| parse_err(2, "missing `detectors N sources M` header".into()))?;
        let (n_det, n_src) = dims;
        let header_lines = table.comments.len();
        if table.rows.len() != n_det {
            return Err(parse_err(
                header_lines + table.rows.len().min(n_det) + 1,
                format!("expected {n_det} rows, found {}", table.rows.len()),
            ));
        }
        if let Some((i, row)) = table
            .rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != n_src)
        {
            return Err(parse_err(
                header_lines + i + 1,
                format!("expected {n_src} columns, found {}", row.len()),
            ));
        }
        let entries = table.rows.into_iter().flatten().collect();
        Self::new(n_det, n_src, entries, fingerprint)
    }
}

/// Dense row-major Jacobian of the flattened measurements with respect to the
/// flattened parameters `[μ; σ]` (Euclidean coordinates, one entry per cell).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!("{rows}x{cols}"), data.len()));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_transpose_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, yr) in y.iter().enumerate() {
            if *yr == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a * yr;
            }
        }
        out
    }
}

/// Discretization plus illumination/detection layout: the full forward map
/// `(μ, σ) ↦ ℳ`.
#[derive(Debug, Clone)]
pub struct MeasurementSetup {
    disc: Discretization,
    sources: SourceSet,
    detectors: DetectorSet,
    options: SolverOptions,
    inflows: Vec<BoundaryData>,
    representers: Vec<AngularFlux>,
    fingerprint: String,
}

impl MeasurementSetup {
    pub fn new(
        disc: Discretization,
        sources: SourceSet,
        detectors: DetectorSet,
        options: SolverOptions,
    ) -> Self {
        let inflows = sources
            .sources()
            .iter()
            .map(|s| source_inflow(&disc, s))
            .collect();
        let representers = detectors
            .arcs()
            .iter()
            .map(|a| detector_representer(&disc, a))
            .collect();
        for s in sources.sources() {
            warn_on_coverage(&disc, "source", &s.arc);
        }
        for a in detectors.arcs() {
            warn_on_coverage(&disc, "detector", a);
        }
        let fingerprint = geometry_fingerprint(&disc, &sources, &detectors);
        MeasurementSetup {
            disc,
            sources,
            detectors,
            options,
            inflows,
            representers,
            fingerprint,
        }
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn sources(&self) -> &SourceSet {
        &self.sources
    }

    pub fn detectors(&self) -> &DetectorSet {
        &self.detectors
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn inflow(&self, source: usize) -> &BoundaryData {
        &self.inflows[source]
    }

    pub fn n_measurements(&self) -> usize {
        self.sources.len() * self.detectors.len()
    }

    /// Forward fields `φ_j = S(params)` for every source.
    pub fn forward_fluxes(&self, params: &ParameterPair) -> Result<Vec<AngularFlux>> {
        let solver = TransportSolver::new(&self.disc, params, self.options)?;
        self.inflows
            .par_iter()
            .enumerate()
            .map(|(j, g)| {
                solver.solve(None, Some(g)).map_err(|e| Error::Column {
                    column: j,
                    source: Box::new(e),
                })
            })
            .collect()
    }

    /// Detector readings of one field.
    pub fn detect(&self, phi: &AngularFlux) -> Result<Vec<f64>> {
        let b = apply_b(&self.disc, &outflow_trace(&self.disc, phi)?)?;
        Ok(self
            .detectors
            .arcs()
            .iter()
            .map(|arc| integrate_detector(&self.disc, &b, arc))
            .collect())
    }

    pub fn matrix_from_fluxes(&self, fluxes: &[AngularFlux]) -> Result<MeasurementMatrix> {
        let n_det = self.detectors.len();
        let n_src = self.sources.len();
        let mut entries = vec![0.0; n_det * n_src];
        for (j, phi) in fluxes.iter().enumerate() {
            for (i, v) in self.detect(phi)?.into_iter().enumerate() {
                entries[i * n_src + j] = v;
            }
        }
        MeasurementMatrix::new(n_det, n_src, entries, self.fingerprint.clone())
    }

    /// `ℳ(params)`: one forward solve per source.
    pub fn measure(&self, params: &ParameterPair) -> Result<MeasurementMatrix> {
        let fluxes = self.forward_fluxes(params)?;
        self.matrix_from_fluxes(&fluxes)
    }

    /// Measurements and their Jacobian with respect to `[μ; σ]`.
    ///
    /// Costs one forward solve per source and one transposed solve per
    /// detector: the costate of detector `i` does not depend on the source.
    pub fn measure_with_jacobian(
        &self,
        params: &ParameterPair,
    ) -> Result<(MeasurementMatrix, DenseMatrix)> {
        let fluxes = self.forward_fluxes(params)?;
        let matrix = self.matrix_from_fluxes(&fluxes)?;
        let solver = TransportSolver::new(&self.disc, params, self.options)?;
        let costates: Vec<AngularFlux> = self
            .representers
            .par_iter()
            .map(|y| solver.solve_transposed(y))
            .collect::<Result<_>>()?;

        let n_cells = self.disc.n_cells();
        let n_src = self.sources.len();
        let area = self.disc.grid().cell_area();
        let mut jac = DenseMatrix::zeros(self.n_measurements(), 2 * n_cells);
        for (j, phi) in fluxes.into_iter().enumerate() {
            let lin = ForwardLinearization::from_solution(solver.clone(), params.clone(), phi);
            for (i, lam) in costates.iter().enumerate() {
                let grad = lin.adjoint_from_costate(lam);
                let row = jac.row_mut(i * n_src + j);
                for c in 0..n_cells {
                    row[c] = area * grad.mu[c];
                    row[n_cells + c] = area * grad.sigma[c];
                }
            }
        }
        Ok((matrix, jac))
    }
}

/// `ℳ(params)` for the given layout.
pub fn assemble_measurements(
    setup: &MeasurementSetup,
    params: &ParameterPair,
) -> Result<MeasurementMatrix> {
    setup.measure(params)
}

fn geometry_fingerprint(
    disc: &Discretization,
    sources: &SourceSet,
    detectors: &DetectorSet,
) -> String {
    let mut desc = format!(
        "n={};radius={:?};n_dir={};",
        disc.grid().n(),
        disc.grid().radius(),
        disc.n_dir()
    );
    for s in sources.sources() {
        desc.push_str(&format!(
            "src({:?},{:?},{:?});",
            s.arc.center_angle, s.arc.width, s.amplitude
        ));
    }
    for a in detectors.arcs() {
        desc.push_str(&format!("det({:?},{:?});", a.center_angle, a.width));
    }
    let digest = Sha256::digest(desc.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;
    use crate::params::Bounds;
    use crate::quadrature::AngularQuadrature;

    fn disc(n: usize, n_dir: usize) -> Discretization {
        Discretization::new(
            SpatialGrid::build(n, 1.0).unwrap(),
            AngularQuadrature::build(n_dir).unwrap(),
        )
    }

    #[test]
    fn arc_membership_wraps_around() {
        let arc = BoundaryArc::new(PI, 0.2).unwrap();
        assert!(arc.contains(-PI + 0.05));
        assert!(arc.contains(PI - 0.05));
        assert!(!arc.contains(0.0));
        assert!(BoundaryArc::new(0.0, 0.0).is_err());
        assert!(BoundaryArc::new(0.0, 7.0).is_err());
    }

    #[test]
    fn b_of_zero_and_unit_flux() {
        let d = disc(16, 64);
        let zero = outflow_trace(&d, &d.zero_flux()).unwrap();
        assert!(apply_b(&d, &zero).unwrap().iter().all(|&v| v == 0.0));

        let one = AngularFlux::constant(d.n_cells(), d.n_dir(), 1.0);
        let b = apply_b(&d, &outflow_trace(&d, &one).unwrap()).unwrap();
        // Axis-aligned normals: every face sees the same half-range cosine sum.
        let reference: f64 = (0..d.n_dir())
            .map(|k| d.quad().weight(k) * d.quad().direction(k)[0].max(0.0))
            .sum();
        for v in &b {
            assert!((v - reference).abs() < 1e-14);
        }
        assert!((reference - 1.0 / PI).abs() < 1e-3);
    }

    #[test]
    fn b_of_single_direction() {
        let d = disc(8, 8);
        let k0 = 1;
        let phi = AngularFlux::from_fn(d.n_cells(), d.n_dir(), |_, k| (k == k0) as u8 as f64);
        let b = apply_b(&d, &outflow_trace(&d, &phi).unwrap()).unwrap();
        for (f, v) in b.iter().enumerate() {
            let c = d.face_cos(f, k0);
            let expected = if c > 0.0 {
                d.quad().weight(k0) * c
            } else {
                0.0
            };
            assert!((v - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn apply_b_rejects_inflow_data() {
        let d = disc(8, 8);
        assert!(apply_b(&d, &d.inflow_constant(1.0)).is_err());
    }

    #[test]
    fn detector_integrates_arc_length() {
        let d = disc(32, 8);
        let ones = vec![1.0; d.n_faces()];
        let arc = BoundaryArc::new(0.3, 1.0).unwrap();
        let members = faces_in_arc(&d, &arc);
        let expected: f64 = members
            .iter()
            .map(|&f| d.grid().boundary_faces()[f].arc_length)
            .sum();
        assert!(!members.is_empty());
        assert_eq!(integrate_detector(&d, &ones, &arc), expected);
        assert_eq!(integrate_detector(&d, &vec![0.0; d.n_faces()], &arc), 0.0);
    }

    #[test]
    fn half_circle_outflow_of_unit_flux() {
        let d = disc(128, 128);
        let one = AngularFlux::constant(d.n_cells(), d.n_dir(), 1.0);
        let b = apply_b(&d, &outflow_trace(&d, &one).unwrap()).unwrap();
        let arc = BoundaryArc::new(0.5 * PI, PI).unwrap();
        let m = integrate_detector(&d, &b, &arc);
        // Exact: (π R) · (1/π) = R = 1.
        assert!((m - 1.0).abs() < 0.03, "half-circle outflow {m}");
    }

    #[test]
    fn representer_reproduces_detector_functional() {
        let d = disc(10, 8);
        let arc = BoundaryArc::new(1.0, 1.5).unwrap();
        let y = detector_representer(&d, &arc);
        let phi = AngularFlux::from_fn(d.n_cells(), d.n_dir(), |c, k| {
            1.0 + 0.3 * (c as f64).sin() + 0.1 * k as f64
        });
        let direct = {
            let b = apply_b(&d, &outflow_trace(&d, &phi).unwrap()).unwrap();
            integrate_detector(&d, &b, &arc)
        };
        let via_inner = d.inner(&phi, &y);
        assert!((direct - via_inner).abs() < 1e-13 * direct.abs());
    }

    #[test]
    fn zero_amplitude_sources_measure_nothing() {
        let d = disc(8, 8);
        let setup = MeasurementSetup::new(
            d,
            SourceSet::uniform(4, 0.0, 1.0, 0.0).unwrap(),
            DetectorSet::uniform(4, 0.5, 1.0).unwrap(),
            SolverOptions::default(),
        );
        let p = ParameterPair::constant(
            setup.discretization().n_cells(),
            0.1,
            1.0,
            Bounds::new(1.0, 2.0).unwrap(),
        )
        .unwrap();
        let m = setup.measure(&p).unwrap();
        assert_eq!((m.n_detectors(), m.n_sources()), (4, 4));
        assert!(m.entries().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fingerprint_depends_on_layout() {
        let mk = |n_dir, width| {
            MeasurementSetup::new(
                disc(8, n_dir),
                SourceSet::uniform(4, 0.0, width, 1.0).unwrap(),
                DetectorSet::uniform(4, 0.5, 1.0).unwrap(),
                SolverOptions::default(),
            )
            .fingerprint()
            .to_string()
        };
        assert_eq!(mk(8, 1.0), mk(8, 1.0));
        assert_ne!(mk(8, 1.0), mk(12, 1.0));
        assert_ne!(mk(8, 1.0), mk(8, 1.1));
    }

    #[test]
    fn dense_matrix_products() {
        let m = DenseMatrix::from_row_major(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(m.mul_vec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        assert_eq!(m.mul_transpose_vec(&[1.0, 1.0]), vec![5.0, 7.0, 9.0]);
        assert!(DenseMatrix::from_row_major(2, 2, vec![1.0]).is_err());
    }
}
