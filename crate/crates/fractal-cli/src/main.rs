//! Command-line surface for the fractal-contents library.
//!
//! Five commands share one normalized job configuration:
//!
//! * `analyze`: full dimension report (JSON) plus a sample CSV;
//! * `estimate`: per-index exponent fits only;
//! * `verify`: identity suites with machine-readable failures;
//! * `zeta`: table of geometric zeta values along three routes;
//! * `raster`: rasterize a model to a PGM artifact.
//!
//! Exit codes: 0 success, 1 identity failure, 2 input error. Outputs are
//! byte-identical across runs for the same configuration and seed.

mod commands;
mod config;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fractal_contents::Result;

use config::{JobConfig, OutputConfig, RasterConfig};

#[derive(Parser)]
#[command(
    name = "fractal-cli",
    about = "Fractal geometric functionals: reports, identity suites, zeta tables, rasters",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Model description: inline JSON (starts with '{') or a path to a
    /// JSON file. See the README for the schema of every model kind.
    #[arg(long)]
    model: Option<String>,
    /// Raster cell size.
    #[arg(long)]
    h: Option<f64>,
    /// Raster padding distance beyond the model's bounding box.
    #[arg(long)]
    pad: Option<f64>,
    /// Largest sampling scale t_max.
    #[arg(long)]
    tmax: Option<f64>,
    /// Geometric sampling ratio in (0, 1).
    #[arg(long)]
    ratio: Option<f64>,
    /// Number of geometric samples.
    #[arg(long)]
    count: Option<usize>,
    /// Base path for written artifacts (extensions are appended).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stdout format where a choice exists: text, json, or csv.
    #[arg(long, default_value = "text")]
    format: String,
    /// Seed for randomized checks; fixed seed means fixed output bytes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension report (JSON) plus sample CSV for one model.
    Analyze(CommonArgs),
    /// Run identity suites; exit 1 if any check fails.
    Verify(VerifyArgs),
    /// Per-index scaling exponent fits for one model.
    Estimate(CommonArgs),
    /// Geometric zeta table along three routes for a string model.
    Zeta(CommonArgs),
    /// Rasterize a model and write a PGM artifact.
    Raster(CommonArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Suite to run: all, steiner1d, matrices, roundtrip, theta, lens, zeta.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Largest ambient dimension for the matrix suite.
    #[arg(long, default_value_t = 8)]
    dmax: usize,
}

/// Build the normalized job from parsed flags; commands that need a
/// model get it loaded and their scale grid resolved here.
fn job_from_args(command: &str, args: &CommonArgs, needs_model: bool) -> Result<JobConfig> {
    let model = match (&args.model, needs_model) {
        (Some(text), _) => Some(config::load_model(text)?),
        (None, true) => {
            return Err(fractal_contents::Error::Domain(format!(
                "{command} requires --model (inline JSON or a file path)"
            )))
        }
        (None, false) => None,
    };
    let scales = match &model {
        Some(m) if m.dim() > 0 => {
            Some(config::resolve_grid(m, args.tmax, args.ratio, args.count)?)
        }
        _ => None,
    };
    let raster = match (args.h, args.pad) {
        (None, None) => None,
        (h, pad) => Some(RasterConfig { h: h.unwrap_or(1.0 / 256.0), pad: pad.unwrap_or(0.3) }),
    };
    let job = JobConfig {
        command: command.to_string(),
        model,
        scales,
        raster,
        output: OutputConfig { format: args.format.clone(), path: args.out.clone() },
        seed: args.seed,
    };
    job.validate()?;
    Ok(job)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(args) => {
            let job = job_from_args("analyze", &args, true)?;
            commands::analyze(&job)
        }
        Command::Estimate(args) => {
            let job = job_from_args("estimate", &args, true)?;
            commands::estimate(&job)
        }
        Command::Verify(args) => {
            let job = job_from_args("verify", &args.common, false)?;
            commands::verify(&job, &args.suite, args.dmax)
        }
        Command::Zeta(args) => {
            let job = job_from_args("zeta", &args, true)?;
            commands::zeta_table(&job)
        }
        Command::Raster(args) => {
            let mut job = job_from_args("raster", &args, true)?;
            if job.raster.is_none() {
                job.raster = Some(RasterConfig { h: 1.0 / 256.0, pad: 0.3 });
            }
            commands::raster_cmd(&job)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
