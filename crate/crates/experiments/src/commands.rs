//! Subcommand implementations: each writes CSV files under the output
//! directory and returns a human-readable report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rtt_core::csv;
use rtt_core::inversion::iterations_to_csv;
use rtt_core::measurement::{apply_b, MeasurementMatrix};
use rtt_core::transport::{outflow_trace, scalar_flux};
use rtt_core::ParameterPair;

use crate::checks;
use crate::config::ExperimentConfig;
use crate::error::{ExperimentError, Result};
use crate::study::{calibrate, pgn_study, rate_study, Calibration, Context};

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| ExperimentError::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_field(ctx: &Context, path: &Path, values: &[f64]) -> Result<()> {
    let rows = ctx.setup.discretization().grid().to_rows(values, f64::NAN);
    let header = vec![format!("fingerprint {}", ctx.setup.fingerprint())];
    Ok(csv::write_matrix(path, &header, &rows)?)
}

fn read_field(ctx: &Context, path: &Path) -> Result<Vec<f64>> {
    let table = csv::read_matrix(path)?;
    let found = table
        .comments
        .iter()
        .find_map(|c| c.strip_prefix("fingerprint "))
        .unwrap_or("");
    if found != ctx.setup.fingerprint() {
        return Err(rtt_core::Error::FingerprintMismatch {
            expected: ctx.setup.fingerprint().to_string(),
            found: found.to_string(),
        }
        .into());
    }
    Ok(ctx.setup.discretization().grid().from_rows(&table.rows)?)
}

fn write_pair(ctx: &Context, dir: &Path, stem: &str, x: &ParameterPair) -> Result<()> {
    write_field(ctx, &dir.join(format!("{stem}_mu.csv")), x.mu())?;
    write_field(ctx, &dir.join(format!("{stem}_sigma.csv")), x.sigma())
}

fn read_pair(ctx: &Context, dir: &Path, stem: &str) -> Result<ParameterPair> {
    let mu = read_field(ctx, &dir.join(format!("{stem}_mu.csv")))?;
    let sigma = read_field(ctx, &dir.join(format!("{stem}_sigma.csv")))?;
    Ok(ParameterPair::new(mu, sigma, ctx.config.bounds())?)
}

/// Calibration artifacts consumed by `rates` and `pgn`.
pub struct Artifacts {
    pub dagger: ParameterPair,
    pub data: MeasurementMatrix,
}

pub fn calibration_dir(out: &Path) -> PathBuf {
    out.join("calibration")
}

pub fn load_artifacts(ctx: &Context, out: &Path) -> Result<Artifacts> {
    let dir = calibration_dir(out);
    Ok(Artifacts {
        dagger: read_pair(ctx, &dir, "dagger")?,
        data: MeasurementMatrix::load(
            &dir.join("measurements_dagger.csv"),
            ctx.setup.fingerprint(),
        )?,
    })
}

pub fn save_calibration(ctx: &Context, out: &Path, cal: &Calibration) -> Result<()> {
    let dir = calibration_dir(out);
    write_pair(ctx, &dir, "phantom", &cal.phantom)?;
    write_pair(ctx, &dir, "dagger", cal.dagger())?;
    cal.phantom_data
        .save(&dir.join("measurements_phantom.csv"))?;
    cal.dagger_data.save(&dir.join("measurements_dagger.csv"))?;
    write(
        &dir.join("iterations.csv"),
        &iterations_to_csv(&cal.primary.records),
    )?;
    let mut summary = String::from("prior_mu,prior_sigma,relative_misfit,iterations,converged\n");
    for rec in std::iter::once(&cal.primary).chain(cal.alternate.as_ref()) {
        let _ = writeln!(
            summary,
            "{:?},{:?},{:?},{},{}",
            rec.prior.mu()[0],
            rec.prior.sigma()[0],
            rec.relative_misfit,
            rec.records.len(),
            rec.converged as u8
        );
    }
    if let Some(alt) = &cal.alternate {
        write_pair(ctx, &dir, "alternate_dagger", &alt.solution)?;
        write(
            &dir.join("alternate_iterations.csv"),
            &iterations_to_csv(&alt.records),
        )?;
    }
    write(&dir.join("summary.csv"), &summary)
}

pub fn cmd_check(config: &ExperimentConfig) -> Result<String> {
    let results = checks::run_all(config.seed, config.check.break_adjoint)?;
    let mut report = String::new();
    for r in &results {
        let _ = writeln!(report, "{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        eprint!("{report}");
        return Err(ExperimentError::CheckFailed { failed });
    }
    Ok(report)
}

pub fn cmd_calibrate(config: &ExperimentConfig, out: &Path) -> Result<String> {
    let ctx = Context::new(config)?;
    let cal = calibrate(&ctx)?;
    save_calibration(&ctx, out, &cal)?;
    let mut report = format!(
        "x† after {} iterations (converged: {}), relative misfit {:.3e}\n",
        cal.primary.records.len(),
        cal.primary.converged,
        cal.primary.relative_misfit
    );
    if let Some(alt) = &cal.alternate {
        let _ = writeln!(
            report,
            "alternate prior: relative misfit {:.3e}, ‖x†₁ − x†₂‖_H1 = {:.4e}",
            alt.relative_misfit,
            ctx.distance(cal.dagger(), &alt.solution)
        );
    }
    let _ = writeln!(report, "wrote {}", calibration_dir(out).display());
    Ok(report)
}

pub fn cmd_rates(config: &ExperimentConfig, out: &Path) -> Result<String> {
    let ctx = Context::new(config)?;
    let art = load_artifacts(&ctx, out)?;
    let table = rate_study(&ctx, &art.dagger, &art.data)?;
    let path = out.join("rates.csv");
    write(&path, &table.to_csv())?;
    let mut report = String::new();
    for r in &table.rows {
        let _ = writeln!(
            report,
            "alpha {:.1e}  res {:.4e}  err {:.4e}  ({} iterations)",
            r.alpha, r.residual, r.error, r.iterations
        );
    }
    let _ = writeln!(
        report,
        "slopes: res {:.3}, err {:.3}; err monotone: {}\nwrote {}",
        table.residual_slope,
        table.error_slope,
        table.error_monotone(),
        path.display()
    );
    Ok(report)
}

pub fn cmd_pgn(config: &ExperimentConfig, out: &Path) -> Result<String> {
    let ctx = Context::new(config)?;
    let art = load_artifacts(&ctx, out)?;
    let study = pgn_study(&ctx, &art.data, config.regularization.alpha_fixed)?;
    let path = out.join("pgn.csv");
    write(&path, &study.to_csv())?;
    Ok(format!(
        "alpha {:.1e}: reference after {} iterations; ratio {:.4} on rows {}..{}; \
         residual floor {:.4e}; monotone res {} err {}\nwrote {}\n",
        study.alpha,
        study.reference_iterations,
        study.ratio,
        study.fit_range.0,
        study.fit_range.1,
        study.residual_floor(),
        study.residual_monotone(),
        study.error_monotone(),
        path.display()
    ))
}

/// Forward solves at the phantom: per source the direction-resolved field
/// (one row per cell), the angular average on the grid, and `Bφ` per face.
pub fn cmd_forward(config: &ExperimentConfig, out: &Path) -> Result<String> {
    let ctx = Context::new(config)?;
    let disc = ctx.setup.discretization();
    let phantom = config.phantom(disc)?;
    let fluxes = ctx.setup.forward_fluxes(&phantom)?;
    let dir = out.join("forward");
    let header = vec![format!("fingerprint {}", ctx.setup.fingerprint())];
    for (j, phi) in fluxes.iter().enumerate() {
        let per_dir: Vec<Vec<f64>> = (0..disc.n_cells()).map(|c| phi.cell(c).to_vec()).collect();
        csv::write_matrix(
            &dir.join(format!("source{j}_directions.csv")),
            &header,
            &per_dir,
        )?;
        write_field(
            &ctx,
            &dir.join(format!("source{j}_average.csv")),
            &scalar_flux(phi, disc.quad()),
        )?;
        let b = apply_b(disc, &outflow_trace(disc, phi)?)?;
        let faces = disc.grid().boundary_faces();
        let rows: Vec<Vec<f64>> = b
            .iter()
            .zip(faces)
            .map(|(v, f)| vec![f.angle, f.center[0], f.center[1], *v])
            .collect();
        let mut h = header.clone();
        h.push("angle,x,y,outflow".into());
        csv::write_matrix(&dir.join(format!("source{j}_outflow.csv")), &h, &rows)?;
    }
    let m = ctx.setup.matrix_from_fluxes(&fluxes)?;
    m.save(&dir.join("measurements.csv"))?;
    Ok(format!(
        "{} sources × {} detectors, ‖ℳ‖ = {:.6e}\nwrote {}\n",
        m.n_sources(),
        m.n_detectors(),
        m.norm(),
        dir.display()
    ))
}
