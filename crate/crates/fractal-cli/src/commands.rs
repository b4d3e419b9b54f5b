//! Implementations of the five commands. Each returns the process exit
//! code: 0 for success, 1 for identity failures, with input errors
//! surfacing as `Err` and mapping to exit code 2.

use std::path::{Path, PathBuf};

use fractal_contents::{
    dimension_report, distance_transform, exact_tube_volume, fit_exponent, rasterize,
    sample_profile, samples_csv, tube_volume_from_profiles, write_pgm, DimensionReport,
    Error, FractalString, RasterPlan, ReportOptions, Result, SampleGrid, ScalingReport,
    SetModel, SteinerCoefficients,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{fmt17, JobConfig};
use crate::suites;

/// Full analysis artifact: the job that produced it plus the report.
#[derive(Serialize)]
struct AnalysisArtifact<'a> {
    job: &'a JobConfig,
    report: DimensionReport,
}

#[derive(Serialize)]
struct EstimateArtifact<'a> {
    job: &'a JobConfig,
    reports: Vec<ScalingReport>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn with_extension(base: &Path, ext: &str) -> PathBuf {
    let mut os = base.as_os_str().to_owned();
    os.push(ext);
    PathBuf::from(os)
}

/// `analyze`: dimension report JSON plus a fixed-column CSV of samples.
pub fn analyze(job: &JobConfig) -> Result<i32> {
    let model = job.model.as_ref().expect("analyze requires a model");
    let grid = job.scales.expect("analyze always resolves scales");
    let opts = ReportOptions {
        grid: Some(grid),
        raster: job.raster.map(|r| RasterPlan { h: r.h, pad: r.pad }),
    };
    let report = dimension_report(model, &opts)?;

    // Sample table: t, beta0, beta1, mu0, mu1, volume. One-dimensional
    // models report zero for the absent planar columns.
    let d = model.dim();
    let coeffs = SteinerCoefficients::new(d.max(2))?;
    let profiles: Vec<_> = (0..d).map(|i| model.profile(i)).collect::<Result<_>>()?;
    let sampled: Vec<_> = profiles
        .iter()
        .map(|p| sample_profile(p, &grid, false))
        .collect::<Result<Vec<_>>>()?;
    let rows_len = sampled.iter().map(|s| s.len()).min().unwrap_or(0);
    let mut rows = Vec::with_capacity(rows_len);
    for k in 0..rows_len {
        let t = sampled[0].abscissae[k];
        let beta: Vec<f64> = (0..d).map(|i| sampled[i].values[k]).collect();
        let mu: Vec<f64> = (0..d)
            .map(|i| {
                (0..=i)
                    .map(|j| coeffs.c(i, j) * t.powi((i - j) as i32) * beta[j])
                    .sum()
            })
            .collect();
        let volume = if d == 1 {
            exact_tube_volume(model, t)?.unwrap_or(f64::NAN)
        } else {
            tube_volume_from_profiles(model, t, 1e-9)?.value
        };
        rows.push(vec![
            t,
            beta[0],
            if d > 1 { beta[1] } else { 0.0 },
            mu[0],
            if d > 1 { mu[1] } else { 0.0 },
            volume,
        ]);
    }
    let csv = samples_csv(&["t", "beta0", "beta1", "mu0", "mu1", "volume"], &rows);

    let artifact = AnalysisArtifact { job, report };
    let json = serde_json::to_string_pretty(&artifact).map_err(|e| {
        Error::Format(format!("report serialization failed: {e}"))
    })?;

    let base = job.output.path.clone().unwrap_or_else(|| PathBuf::from("analysis"));
    write_text(&with_extension(&base, ".json"), &json)?;
    write_text(&with_extension(&base, ".csv"), &csv)?;

    match job.output.format.as_str() {
        "json" => println!("{json}"),
        "csv" => print!("{csv}"),
        _ => {
            let r = &artifact.report;
            for b in &r.basic {
                println!(
                    "index {}: exponent {:.6} in [{:.6}, {:.6}], contents [{:.6}, {:.6}]{}",
                    b.index,
                    b.exponent,
                    b.lower_exponent,
                    b.upper_exponent,
                    b.lower_content,
                    b.upper_content,
                    if b.oscillation_flag { " (oscillating)" } else { "" }
                );
            }
            if let Some(v) = r.volume_dimension {
                println!("volume-regression dimension {v:.6}");
            }
            if let Some(b) = r.box_dimension {
                println!("box-counting dimension {b:.6}");
            }
            println!(
                "max basic exponent {:.6}, discrepancy flag {}",
                r.max_basic_exponent, r.discrepancy_flag
            );
            println!("wrote {} and {}",
                with_extension(&base, ".json").display(),
                with_extension(&base, ".csv").display());
        }
    }
    Ok(0)
}

/// `estimate`: per-index variation exponent fits, no volume or raster
/// routes.
pub fn estimate(job: &JobConfig) -> Result<i32> {
    let model = job.model.as_ref().expect("estimate requires a model");
    let grid = job.scales.expect("estimate always resolves scales");
    let d = model.dim();
    let mut reports = Vec::with_capacity(d);
    for i in 0..d {
        let profile = model.profile(i)?;
        let samples = sample_profile(&profile, &grid, true)?;
        reports.push(fit_exponent(&samples, i)?);
    }
    let artifact = EstimateArtifact { job, reports };
    let json = serde_json::to_string_pretty(&artifact)
        .map_err(|e| Error::Format(format!("estimate serialization failed: {e}")))?;
    if let Some(base) = &job.output.path {
        write_text(&with_extension(base, ".json"), &json)?;
    }
    println!("{json}");
    Ok(0)
}

/// `verify`: run identity suites and report machine-readable failures.
pub fn verify(job: &JobConfig, suite: &str, dmax: usize) -> Result<i32> {
    let mut checks = Vec::new();
    let run_all = suite == "all";
    if run_all || suite == "steiner1d" {
        checks.extend(suites::steiner1d(job.seed)?);
    }
    if run_all || suite == "matrices" {
        checks.extend(suites::matrices(dmax)?);
    }
    if run_all || suite == "roundtrip" {
        checks.extend(suites::roundtrip(job.seed)?);
    }
    if run_all || suite == "theta" {
        let model = job
            .model
            .clone()
            .unwrap_or(SetModel::SierpinskiGasket);
        let h = job.raster.map(|r| r.h).unwrap_or(0.002);
        checks.extend(suites::theta(&model, h)?);
    }
    if run_all || suite == "lens" {
        checks.extend(suites::lens()?);
    }
    if run_all || suite == "zeta" {
        checks.extend(suites::zeta()?);
    }
    if checks.is_empty() {
        return Err(Error::Domain(format!(
            "unknown suite {suite}; expected all, steiner1d, matrices, roundtrip, theta, lens, or zeta"
        )));
    }
    for c in &checks {
        println!(
            "{} {}/{}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.detail
        );
    }
    let failures: Vec<&suites::CheckResult> = checks.iter().filter(|c| !c.pass).collect();
    if failures.is_empty() {
        println!("all {} checks passed", checks.len());
        Ok(0)
    } else {
        let json = serde_json::to_string_pretty(&failures)
            .map_err(|e| Error::Format(format!("failure serialization failed: {e}")))?;
        println!("{json}");
        Ok(1)
    }
}

/// `zeta`: table of the three geometric zeta routes over a descending
/// grid of real s values, with divergent rows marked.
pub fn zeta_table(job: &JobConfig) -> Result<i32> {
    let model = job.model.as_ref().expect("zeta requires a model");
    let string = string_of(model)?;
    let grid = job.scales.unwrap_or(SampleGrid { t_max: 2.5, ratio: 0.85, count: 24 });
    grid.validate()?;
    let eps = string.first_length();

    let mut out = String::from("# schema=1\n");
    out.push_str(
        "s,dirichlet_re,dirichlet_im,mellin_re,mellin_im,functional_re,functional_im,max_residual,status\n",
    );
    for k in 0..grid.count {
        let s = grid.t_max * grid.ratio.powi(k as i32);
        match string.geometric_zeta(Complex64::new(s, 0.0), eps) {
            Ok(v) => {
                let cells = [
                    s,
                    v.dirichlet.re,
                    v.dirichlet.im,
                    v.mellin.re,
                    v.mellin.im,
                    v.functional.re,
                    v.functional.im,
                    v.max_pairwise_residual(),
                ];
                let row: Vec<String> = cells.iter().map(|&c| fmt17(c)).collect();
                out.push_str(&row.join(","));
                out.push_str(",ok\n");
            }
            Err(Error::Divergence(_)) => {
                out.push_str(&fmt17(s));
                out.push_str(",nan,nan,nan,nan,nan,nan,nan,divergent\n");
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(base) = &job.output.path {
        write_text(&with_extension(base, ".csv"), &out)?;
        println!("wrote {}", with_extension(base, ".csv").display());
    } else {
        print!("{out}");
    }
    Ok(0)
}

/// The fractal string behind a one-dimensional model.
fn string_of(model: &SetModel) -> Result<FractalString> {
    match model {
        SetModel::CantorTernary => Ok(FractalString::cantor()),
        SetModel::Svc { a } => FractalString::svc(*a),
        SetModel::StringSet { rule } => FractalString::from_rule(rule.clone()),
        other => Err(Error::Domain(format!(
            "zeta tables require a string model (cantor_ternary, svc, string_set), got {other:?}"
        ))),
    }
}

/// `raster`: rasterize the model, write the PGM artifact, print stats.
pub fn raster_cmd(job: &JobConfig) -> Result<i32> {
    let model = job.model.as_ref().expect("raster requires a model");
    let cfg = job.raster.expect("raster always resolves h and pad");
    let grid = rasterize(model, cfg.h, cfg.pad)?;
    let base = job.output.path.clone().unwrap_or_else(|| PathBuf::from("raster"));
    let pgm = with_extension(&base, ".pgm");
    write_pgm(&grid, &pgm)?;

    #[derive(Serialize)]
    struct RasterStats {
        nx: usize,
        ny: usize,
        occupied: usize,
        h: f64,
        pad: f64,
        path: String,
    }
    let stats = RasterStats {
        nx: grid.nx,
        ny: grid.ny,
        occupied: grid.occupied_count(),
        h: grid.h,
        pad: grid.pad,
        path: pgm.display().to_string(),
    };
    if job.output.format == "json" {
        let json = serde_json::to_string_pretty(&stats)
            .map_err(|e| Error::Format(format!("stats serialization failed: {e}")))?;
        println!("{json}");
    } else {
        println!(
            "{} x {} cells, {} occupied, h = {}, pad = {}, wrote {}",
            stats.nx, stats.ny, stats.occupied, stats.h, stats.pad, stats.path
        );
        let field = distance_transform(&grid)?;
        let dmax = field
            .d2
            .iter()
            .cloned()
            .max()
            .map(|d| grid.h * (d as f64).sqrt())
            .unwrap_or(0.0);
        println!("largest cell-center distance {dmax:.6}");
    }
    Ok(0)
}
