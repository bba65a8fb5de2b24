use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use isosec_core::harmonics::{analyze, cosine_transform_spectral, funk_transform_spectral, HarmonicCoeffs};
use isosec_core::sphere::SphericalGrid;
use isosec_core::transforms::{radial_symmetrize, SphericalFunction};
use isosec_core::zonoid::{build_counterexample, Counterexample};
use isosec_core::{Grid, Vector};

use crate::config::RunConfig;
use crate::report::{Report, ReportRow};
use crate::suites::{self, Context};
use crate::{CliError, Suite, Which};

/// Angles must match the inferred grid to this precision.
const ANGLE_TOLERANCE: f64 = 1e-9;

#[derive(serde::Deserialize)]
struct SampleRow {
    theta: f64,
    phi: f64,
    #[allow(dead_code)]
    weight: f64,
    value: f64,
}

/// Read a grid dump and recover the grid from its ring structure.
pub fn read_samples(path: &Path) -> Result<(Arc<Grid>, Vec<f64>), CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: bad header: {e}", path.display())))?;
    if headers.iter().collect::<Vec<_>>() != ["theta", "phi", "weight", "value"] {
        return Err(CliError::Input(format!(
            "{}: header must be theta,phi,weight,value",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<SampleRow>().enumerate() {
        // line 1 is the header
        let row = rec.map_err(|e| CliError::Input(format!("{} line {}: {e}", path.display(), i + 2)))?;
        if !row.value.is_finite() {
            return Err(CliError::Input(format!(
                "{} line {}: value is not finite",
                path.display(),
                i + 2
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no samples", path.display())));
    }
    let n_phi = rows.iter().take_while(|r| r.theta == rows[0].theta).count();
    if rows.len() % n_phi != 0 {
        return Err(CliError::Input(format!(
            "{}: {} rows do not form rings of {} samples",
            path.display(),
            rows.len(),
            n_phi
        )));
    }
    let grid = Arc::new(SphericalGrid::new(rows.len() / n_phi, n_phi)?);
    for (i, row) in rows.iter().enumerate() {
        let (theta, phi): (f64, f64) = grid.angles(i);
        if (theta - row.theta).abs() > ANGLE_TOLERANCE || (phi - row.phi).abs() > ANGLE_TOLERANCE {
            return Err(CliError::Input(format!(
                "{} line {}: node ({}, {}) is not on the {}x{} Gauss-Legendre grid",
                path.display(),
                i + 2,
                row.theta,
                row.phi,
                grid.n_theta(),
                grid.n_phi()
            )));
        }
    }
    Ok((grid, rows.into_iter().map(|r| r.value).collect()))
}

fn even_part(c: &HarmonicCoeffs<f64>) -> HarmonicCoeffs<f64> {
    c.scale_degrees(|l| if l % 2 == 0 { 1.0 } else { 0.0 })
}

/// Cosine and Funk transforms go through the band-`L` expansion of the
/// samples (`L` capped by the grid); symmetrization averages rings.
pub fn transform(
    cfg: &RunConfig,
    which: Which,
    input: &Path,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let (grid, values) = read_samples(input)?;
    let band = cfg.band.min(grid.max_band());
    let result = match which {
        Which::Cosine | Which::Funk => {
            let c = even_part(&analyze(&grid, &values, band)?);
            let t = if which == Which::Cosine {
                cosine_transform_spectral(&c)?
            } else {
                funk_transform_spectral(&c)?
            };
            SphericalFunction::from_coeffs(grid.clone(), t)
        }
        Which::Symmetrize => radial_symmetrize(
            &SphericalFunction::from_values(grid.clone(), values)?,
            &Vector::basis(2),
        )?,
    };
    match output {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let mut w = BufWriter::new(File::create(p)?);
            result.write_csv(&mut w)?;
            w.flush()?;
        }
        None => result.write_csv(out)?,
    }
    Ok(true)
}

#[derive(Serialize)]
struct DiagnosticsJson {
    c0: f64,
    plateau_residual: f64,
    #[serde(rename = "isotropy_max_dev_on_U")]
    isotropy_max_dev_on_u: f64,
    #[serde(rename = "funk_gap_UV")]
    funk_gap_uv: f64,
    #[serde(rename = "funk_mean_U")]
    funk_mean_u: f64,
    #[serde(rename = "funk_mean_V")]
    funk_mean_v: f64,
    /// Plateau values shifted by `2π c0`: the absolute radii on `U` and `V`.
    #[serde(rename = "radius_U")]
    radius_u: f64,
    #[serde(rename = "radius_V")]
    radius_v: f64,
    u_perp_variance_ratio: f64,
    budget: f64,
    band: usize,
    samples: usize,
    checks: Vec<ReportRow>,
}

pub fn build(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<Counterexample<f64>, CliError> {
    Ok(build_counterexample(
        grid,
        cfg.u_cap(),
        cfg.v_cap(),
        cfg.band,
        cfg.transition,
        cfg.samples,
        cfg.circle_m,
        cfg.seed,
    )?)
}

/// The three counterexample checks at the configured tolerances.
pub fn counterexample_checks(cfg: &RunConfig, ce: &Counterexample<f64>) -> Vec<ReportRow> {
    let d = &ce.diagnostics;
    let t = &cfg.tol;
    vec![
        ReportRow::below(
            "counterexample.isotropy_on_U",
            "isotropic-sections-on-U",
            d.isotropy_max_dev_on_u,
            t.isotropy,
        ),
        ReportRow::below(
            "counterexample.funk_gap_UV",
            "plateau-radii-differ-by-one",
            (d.funk_gap_uv - 1.0).abs(),
            t.funk_gap,
        ),
        ReportRow::above(
            "counterexample.nonconstant_on_U_perp",
            "density-not-constant-on-U-perp",
            d.u_perp_variance_ratio,
            t.variance_ratio,
        ),
    ]
}

fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn counterexample(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let grid = Arc::new(SphericalGrid::new(cfg.n_theta, cfg.n_phi)?);
    let ce = build(cfg, &grid)?;
    let d = &ce.diagnostics;
    let checks = counterexample_checks(cfg, &ce);
    fs::create_dir_all(&cfg.out)?;
    write_file(&cfg.out, "g.csv", |w| ce.zonoid.g.write_csv(w))?;
    write_file(&cfg.out, "g_coeffs.csv", |w| ce.zonoid.density().write_csv(w))?;
    write_file(&cfg.out, "w.csv", |w| ce.w.write_csv(w))?;
    write_file(&cfg.out, "w_coeffs.csv", |w| {
        ce.w.evaluator().expect("w has coefficients").write_csv(w)
    })?;
    let shift = 2.0 * std::f64::consts::PI * d.c0;
    let json = DiagnosticsJson {
        c0: d.c0,
        plateau_residual: d.plateau_residual,
        isotropy_max_dev_on_u: d.isotropy_max_dev_on_u,
        funk_gap_uv: d.funk_gap_uv,
        funk_mean_u: d.funk_mean_u,
        funk_mean_v: d.funk_mean_v,
        radius_u: 1.0 + shift,
        radius_v: 2.0 + shift,
        u_perp_variance_ratio: d.u_perp_variance_ratio,
        budget: d.budget,
        band: cfg.band,
        samples: d.samples,
        checks: checks.clone(),
    };
    let text = serde_json::to_string_pretty(&json).expect("diagnostics serialize");
    write_file(&cfg.out, "diagnostics.json", |w| writeln!(w, "{text}"))?;
    writeln!(
        out,
        "c0 = {:.6e}, plateau residual = {:.3e}, budget = {:.3e}",
        d.c0, d.plateau_residual, d.budget
    )?;
    for c in &checks {
        writeln!(
            out,
            "{} {}: metric {:.6e}, tolerance {:.1e}, budget {:.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.test_id,
            c.metric,
            c.tolerance,
            d.budget
        )?;
    }
    Ok(checks.iter().all(|c| c.pass))
}

pub fn verify(cfg: &RunConfig, suite: Suite, out: &mut dyn Write) -> Result<bool, CliError> {
    let mut ctx = Context::new(cfg)?;
    let rows = suites::run(&mut ctx, suite)?;
    let report = Report::new(cfg.echo(), rows);
    let text = report.to_json();
    writeln!(out, "{text}")?;
    fs::create_dir_all(&cfg.out)?;
    fs::write(
        cfg.out.join(format!("report-{}.json", suite.name())),
        format!("{text}\n"),
    )?;
    Ok(report.passed())
}
