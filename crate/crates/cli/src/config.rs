//! Run configuration: an optional JSON file overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tribox::sweep::{lambda_grid, Spacing};
use tribox::Irrep;

use crate::UsageError;

/// Keys accepted in a config file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub cutoff: Option<u32>,
    pub lmin: Option<f64>,
    pub lmax: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Option<String>,
    pub irreps: Option<Vec<String>>,
    pub levels: Option<usize>,
    pub refine: Option<usize>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, UsageError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("bad config {}: {e}", path.display())))
    }
}

pub fn parse_spacing(s: &str) -> Result<Spacing, UsageError> {
    match s.to_ascii_lowercase().as_str() {
        "linear" => Ok(Spacing::Linear),
        "geometric" => Ok(Spacing::Geometric),
        _ => Err(UsageError(format!("unknown spacing '{s}' (expected linear or geometric)"))),
    }
}

pub fn parse_irreps<S: AsRef<str>>(labels: &[S]) -> Result<Vec<Irrep>, UsageError> {
    let mut out = Vec::new();
    for l in labels {
        let irrep: Irrep = l
            .as_ref()
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("unknown irrep '{}'", l.as_ref())))?;
        if !out.contains(&irrep) {
            out.push(irrep);
        }
    }
    out.sort();
    Ok(out)
}

pub fn check_cutoff(cutoff: u32) -> Result<u32, UsageError> {
    if cutoff < 3 {
        return Err(UsageError(format!("cutoff must be at least 3, got {cutoff}")));
    }
    Ok(cutoff)
}

/// The λ grid of a run.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, UsageError> {
        lambda_grid(self.min, self.max, self.points, self.spacing).map_err(|e| UsageError(e.to_string()))
    }
}

/// Fully resolved settings shared by the sweeping commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cutoff: u32,
    pub grid: GridSpec,
    pub irreps: Vec<Irrep>,
    pub levels: usize,
    pub refine: usize,
    pub out: PathBuf,
}

/// Flag values as parsed; `None` falls back to the file, then the default.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub cutoff: Option<u32>,
    pub lmin: Option<f64>,
    pub lmax: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Option<String>,
    pub irreps: Option<Vec<String>>,
    pub levels: Option<usize>,
    pub refine: Option<usize>,
    pub out: Option<PathBuf>,
}

pub struct Defaults {
    pub cutoff: u32,
    pub out: &'static str,
}

impl RunConfig {
    pub fn resolve(flags: Overrides, file: FileConfig, defaults: Defaults) -> Result<Self, UsageError> {
        let spacing = flags.spacing.or(file.spacing).unwrap_or_else(|| "geometric".into());
        let irreps = match flags.irreps.or(file.irreps) {
            Some(l) => parse_irreps(&l)?,
            None => Irrep::ALL.to_vec(),
        };
        let config = RunConfig {
            cutoff: check_cutoff(flags.cutoff.or(file.cutoff).unwrap_or(defaults.cutoff))?,
            grid: GridSpec {
                min: flags.lmin.or(file.lmin).unwrap_or(1e-3),
                max: flags.lmax.or(file.lmax).unwrap_or(1e3),
                points: flags.points.or(file.points).unwrap_or(60),
                spacing: parse_spacing(&spacing)?,
            },
            irreps,
            levels: flags.levels.or(file.levels).unwrap_or(10),
            refine: flags.refine.or(file.refine).unwrap_or(5),
            out: flags.out.or(file.out).unwrap_or_else(|| defaults.out.into()),
        };
        if config.irreps.is_empty() {
            return Err(UsageError("irrep filter is empty".into()));
        }
        if config.levels == 0 {
            return Err(UsageError("levels must be at least 1".into()));
        }
        config.grid.values()?;
        Ok(config)
    }
}
