//! Config file loading and flag merging.
//!
//! Files are flat TOML; every key is optional and any unknown key is an
//! error. Command-line flags override file values, file values override
//! the built-in defaults, and defaults depend on the resolved dimension
//! so that `--dimension 2` alone selects the two-dimensional study.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use fracfield::quadrature::DEFAULT_MEMORY_CAP;
use fracfield::spectral::Functional;
use fracfield::study::{CalibrationStrategy, StudyConfig};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dimension: Option<usize>,
    pub kappa: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub meshes: Option<Vec<usize>>,
    pub calibration: Option<String>,
    pub n_ok: Option<usize>,
    pub grid_points: Option<usize>,
    pub functionals: Option<Vec<String>>,
    pub memory_cap: Option<usize>,
    pub beta: Option<f64>,
    pub mesh: Option<usize>,
    pub step: Option<f64>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read config file {}", p.display()))?;
            toml::from_str(&text)
                .with_context(|| format!("invalid config file {}", p.display()))
        }
    }
}

/// Study parameters collected from flags, before merging.
#[derive(Debug, Default)]
pub struct StudyOverrides {
    pub dimension: Option<usize>,
    pub kappa: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub meshes: Option<Vec<usize>>,
    pub calibration: Option<String>,
    pub n_ok: Option<usize>,
    pub grid_points: Option<usize>,
    pub functionals: Option<Vec<String>>,
    pub memory_cap: Option<usize>,
}

fn parse_functionals(specs: &[String]) -> Result<Vec<Functional>> {
    specs
        .iter()
        .map(|s| {
            s.parse::<Functional>()
                .with_context(|| format!("invalid functional spec '{s}'"))
        })
        .collect()
}

fn parse_calibration(name: &str) -> Result<CalibrationStrategy> {
    name.parse::<CalibrationStrategy>()
        .with_context(|| format!("invalid calibration '{name}'"))
}

/// The published study layout for each dimension.
fn default_meshes(dimension: usize) -> Vec<usize> {
    match dimension {
        2 => vec![15, 31, 63],
        _ => vec![511, 1023, 2047, 4095],
    }
}

fn default_resolution(dimension: usize) -> usize {
    match dimension {
        2 => 1 + (1 << 11),
        _ => 1 + (1 << 18),
    }
}

pub const DEFAULT_BETAS: [f64; 4] = [0.6, 0.7, 0.8, 0.9];
pub const DEFAULT_KAPPA: f64 = 0.5;

fn default_functionals() -> Vec<Functional> {
    vec![
        Functional::AbsPower { p: 2 },
        Functional::AbsPower { p: 3 },
        Functional::AbsPower { p: 4 },
        Functional::Probit { a: 0.5, c: 20.0 },
    ]
}

pub fn build_study_config(
    file: &FileConfig,
    flags: &StudyOverrides,
) -> Result<StudyConfig> {
    let dimension = flags.dimension.or(file.dimension).unwrap_or(1);
    if dimension != 1 && dimension != 2 {
        bail!("dimension must be 1 or 2, got {dimension}");
    }
    let functionals = match (&flags.functionals, &file.functionals) {
        (Some(specs), _) | (None, Some(specs)) => parse_functionals(specs)?,
        (None, None) => default_functionals(),
    };
    let calibration = match (&flags.calibration, &file.calibration) {
        (Some(name), _) | (None, Some(name)) => parse_calibration(name)?,
        (None, None) => CalibrationStrategy::Experiment,
    };
    Ok(StudyConfig {
        dimension,
        kappa: flags.kappa.or(file.kappa).unwrap_or(DEFAULT_KAPPA),
        betas: flags
            .betas
            .clone()
            .or_else(|| file.betas.clone())
            .unwrap_or_else(|| DEFAULT_BETAS.to_vec()),
        meshes: flags
            .meshes
            .clone()
            .or_else(|| file.meshes.clone())
            .unwrap_or_else(|| default_meshes(dimension)),
        calibration,
        n_ok: flags.n_ok.or(file.n_ok).unwrap_or_else(|| default_resolution(dimension)),
        grid_points: flags
            .grid_points
            .or(file.grid_points)
            .unwrap_or_else(|| default_resolution(dimension)),
        functionals,
        memory_cap: flags.memory_cap.or(file.memory_cap).unwrap_or(DEFAULT_MEMORY_CAP),
    })
}
