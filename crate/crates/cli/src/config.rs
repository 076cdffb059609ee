//! Where the model parameters come from: flags over a JSON config file, or
//! a calibration on a price CSV.

use std::path::{Path, PathBuf};

use pairstop::calibration::DEFAULT_DT;
use pairstop::{estimate, load_csv, CalibrationResult, MarketParams, Position, PriceSeries};
use serde::Deserialize;

use crate::args::{DataArgs, ModelArg, ParamArgs, SimArgs};
use crate::error::CliError;

pub const CONFIG_ENV: &str = "PAIRSTOP_CONFIG";

/// The reference parameter set, shipped with the binary.
pub const REFERENCE_CONFIG: &str = include_str!("../config/reference.json");

/// Config file contents. Keys are the flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub s11: Option<f64>,
    pub s12: Option<f64>,
    pub s22: Option<f64>,
    pub rho: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub model: Option<ModelArg>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub tmax: Option<f64>,
    pub paths: Option<usize>,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub position: Option<String>,
}

impl FileConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("config {origin}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn reference() -> Self {
        Self::parse(REFERENCE_CONFIG, "reference").expect("shipped config parses")
    }
}

/// The config named by `--config`, else by `$PAIRSTOP_CONFIG`.
pub fn config_path(params: &ParamArgs) -> Option<PathBuf> {
    params.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

pub fn load_config(params: &ParamArgs) -> Result<Option<FileConfig>, CliError> {
    config_path(params).map(|p| FileConfig::load(&p)).transpose()
}

fn pick(flag: Option<f64>, file: Option<f64>, name: &str) -> Result<f64, CliError> {
    flag.or(file).ok_or_else(|| CliError::Usage(format!("missing --{name} (and no config file sets it)")))
}

pub fn market_params(params: &ParamArgs, file: &FileConfig) -> Result<MarketParams, CliError> {
    Ok(MarketParams::symmetric(
        pick(params.mu1, file.mu1, "mu1")?,
        pick(params.mu2, file.mu2, "mu2")?,
        pick(params.s11, file.s11, "s11")?,
        pick(params.s12, file.s12, "s12")?,
        pick(params.s22, file.s22, "s22")?,
        pick(params.rho, file.rho, "rho")?,
        pick(params.k, file.k, "K")?,
    ))
}

fn has_diffusion_flags(p: &ParamArgs) -> bool {
    [p.mu1, p.mu2, p.s11, p.s12, p.s22].iter().any(Option::is_some)
}

/// Parameters plus, when they were estimated, the calibration behind them.
pub struct Resolved {
    pub params: MarketParams,
    pub calibration: Option<CalibrationResult>,
    pub file: FileConfig,
}

pub fn read_series(data: &DataArgs) -> Result<PriceSeries, CliError> {
    let path = data.csv.as_ref().ok_or_else(|| CliError::Usage("missing --csv".into()))?;
    Ok(load_csv(path)?)
}

pub fn observation_dt(data: &DataArgs) -> f64 {
    data.dt.unwrap_or(DEFAULT_DT)
}

/// Calibrates on the leading `--split` fraction of `series` with `rho` and
/// `K` from the flags.
pub fn calibrate(series: &PriceSeries, params: &ParamArgs, data: &DataArgs) -> Result<CalibrationResult, CliError> {
    if has_diffusion_flags(params) || params.config.is_some() {
        return Err(CliError::Usage(
            "--csv is a parameter source of its own; drop --config and the drift/volatility flags".into(),
        ));
    }
    let rho = params.rho.ok_or_else(|| CliError::Usage("missing --rho (needed with --csv)".into()))?;
    let k = params.k.ok_or_else(|| CliError::Usage("missing --K (needed with --csv)".into()))?;
    let sample = match data.split {
        Some(f) => series.head_fraction(f)?,
        None => series.clone(),
    };
    Ok(estimate(&sample, observation_dt(data), rho, k)?)
}

/// Exactly one source: a price CSV, or flags over a config file.
pub fn resolve(params: &ParamArgs, data: &DataArgs) -> Result<Resolved, CliError> {
    if data.csv.is_some() {
        let result = calibrate(&read_series(data)?, params, data)?;
        return Ok(Resolved { params: result.params, calibration: Some(result), file: FileConfig::default() });
    }
    if data.split.is_some() || data.dt.is_some() {
        return Err(CliError::Usage("--split and --dt apply to --csv data".into()));
    }
    resolve_flags(params, None)
}

/// Flags over the config file, over `fallback` when there is no file.
pub fn resolve_flags(params: &ParamArgs, fallback: Option<FileConfig>) -> Result<Resolved, CliError> {
    let file = load_config(params)?.or(fallback).unwrap_or_default();
    Ok(Resolved { params: market_params(params, &file)?, calibration: None, file })
}

/// Simulation settings with defaults filled in.
pub struct SimSettings {
    pub seed: u64,
    pub dt: f64,
    pub tmax: f64,
    pub paths: usize,
    pub x1: f64,
    pub x2: f64,
    pub position: Position,
}

pub fn parse_position(text: Option<&str>) -> Result<Position, CliError> {
    Ok(text.map(str::parse).transpose()?.unwrap_or(Position::Flat))
}

pub fn sim_settings(sim: &SimArgs, file: &FileConfig) -> Result<SimSettings, CliError> {
    let seed = sim
        .seed
        .or(file.seed)
        .ok_or_else(|| CliError::Usage("simulate needs an explicit --seed".into()))?;
    Ok(SimSettings {
        seed,
        dt: sim.dt.or(file.dt).unwrap_or(1e-3),
        tmax: sim.tmax.or(file.tmax).unwrap_or(40.0),
        paths: sim.paths.or(file.paths).unwrap_or(10_000),
        x1: sim.x1.or(file.x1).unwrap_or(100.0),
        x2: sim.x2.or(file.x2).unwrap_or(100.0),
        position: parse_position(sim.position.as_deref().or(file.position.as_deref()))?,
    })
}
