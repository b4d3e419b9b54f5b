//! Normalized job configuration: every command run is described by one
//! serializable `JobConfig`, so identical configs reproduce identical
//! output bytes.

use std::path::PathBuf;

use fractal_contents::{default_grid, Error, Result, SampleGrid, SetModel};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RasterConfig {
    pub h: f64,
    pub pad: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputConfig {
    /// "csv" or "json": what gets echoed to stdout where a choice exists.
    pub format: String,
    /// Base path for written artifacts; extensions are appended per file.
    pub path: Option<PathBuf>,
}

/// One command invocation, fully normalized.
#[derive(Debug, Clone, Serialize)]
pub struct JobConfig {
    pub command: String,
    pub model: Option<SetModel>,
    pub scales: Option<SampleGrid>,
    pub raster: Option<RasterConfig>,
    pub output: OutputConfig,
    pub seed: u64,
}

impl JobConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(scales) = &self.scales {
            scales.validate()?;
        }
        if let Some(raster) = &self.raster {
            if !raster.h.is_finite() || raster.h <= 0.0 {
                return Err(Error::Domain(format!(
                    "raster step h must be positive, got {}",
                    raster.h
                )));
            }
            if !raster.pad.is_finite() || raster.pad <= 0.0 {
                return Err(Error::Domain(format!(
                    "raster pad must be positive, got {}",
                    raster.pad
                )));
            }
        }
        match self.output.format.as_str() {
            "csv" | "json" | "text" => Ok(()),
            other => Err(Error::Domain(format!(
                "output format must be csv, json, or text, got {other}"
            ))),
        }
    }
}

/// Parse a model argument: inline JSON when it starts with `{`, a file
/// path otherwise.
pub fn load_model(arg: &str) -> Result<SetModel> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)?
    };
    if text.trim().is_empty() {
        return Err(Error::Domain(format!("model description at {arg} is empty")));
    }
    let model = SetModel::from_json(&text)?;
    model.validate()?;
    Ok(model)
}

/// Resolve the sampling grid: explicit flags override the model-matched
/// default grid field by field.
pub fn resolve_grid(
    model: &SetModel,
    tmax: Option<f64>,
    ratio: Option<f64>,
    count: Option<usize>,
) -> Result<SampleGrid> {
    let base = default_grid(model);
    let grid = SampleGrid {
        t_max: tmax.unwrap_or(base.t_max),
        ratio: ratio.unwrap_or(base.ratio),
        count: count.unwrap_or(base.count),
    };
    grid.validate()?;
    Ok(grid)
}

/// Format one float with 17 significant digits, the fixed width used in
/// every CSV artifact.
pub fn fmt17(v: f64) -> String {
    format!("{v:.17e}")
}
