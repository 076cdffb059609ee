use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pairstop::simulator::Model;

#[derive(Parser, Debug)]
#[command(name = "pairstop", version, about = "Optimal round-trip thresholds for a pair of GBM stocks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve for the trading thresholds.
    Thresholds {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Only this model (default: both).
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
    /// Threshold sensitivity tables, one per model and swept parameter.
    Tables {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
    /// Estimate drifts and volatilities from a price CSV.
    Calibrate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check the variational inequalities and smooth fit on a grid.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        /// Replace the solved lower threshold, keeping the coefficients.
        #[arg(long)]
        lower: Option<f64>,
        /// Replace the solved upper threshold, keeping the coefficients.
        #[arg(long)]
        upper: Option<f64>,
        /// Number of log-spaced grid points on [1e-3, 1e3].
        #[arg(long, default_value_t = 10_000)]
        points: usize,
    },
    /// Monte Carlo value of following the optimal rule.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
    /// Replay the optimal rule on a price CSV.
    Backtest {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        /// Initial position: long, flat or short (or 1, 0, -1).
        #[arg(long, allow_negative_numbers = true)]
        position: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Thresholds { .. } => "thresholds",
            Command::Tables { .. } => "tables",
            Command::Calibrate { .. } => "calibrate",
            Command::Verify { .. } => "verify",
            Command::Simulate { .. } => "simulate",
            Command::Backtest { .. } => "backtest",
        }
    }
}

/// Model parameters given on the command line. Values here override the
/// config file.
#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub mu1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub s11: Option<f64>,
    /// Off-diagonal volatility, used for both sigma12 and sigma21.
    #[arg(long, allow_negative_numbers = true)]
    pub s12: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub s22: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Proportional transaction cost rate.
    #[arg(long = "K", value_name = "K", allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// JSON file with flat keys named like the flags. Falls back to
    /// $PAIRSTOP_CONFIG.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// A price file: columns date,price1,price2.
#[derive(Args, Debug, Clone, Default)]
pub struct DataArgs {
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Calibrate on this leading fraction of the rows only.
    #[arg(long)]
    pub split: Option<f64>,
    /// Years between rows (default 1/252).
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Time step in years (default 0.001).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Horizon in years (default 40).
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of paths (default 10000).
    #[arg(long)]
    pub paths: Option<usize>,
    /// Initial price of stock 1 (default 100).
    #[arg(long)]
    pub x1: Option<f64>,
    /// Initial price of stock 2 (default 100).
    #[arg(long)]
    pub x2: Option<f64>,
    /// Initial position: long, flat or short (or 1, 0, -1).
    #[arg(long, allow_negative_numbers = true)]
    pub position: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize)]
pub enum ModelArg {
    #[value(name = "long-flat")]
    #[serde(rename = "long-flat")]
    LongFlat,
    #[value(name = "long-flat-short")]
    #[serde(rename = "long-flat-short")]
    LongFlatShort,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::LongFlat => Model::LongFlat,
            ModelArg::LongFlatShort => Model::LongFlatShort,
        }
    }
}

/// The selected model, or both.
pub fn models(model: Option<ModelArg>) -> Vec<Model> {
    match model {
        Some(m) => vec![m.into()],
        None => vec![Model::LongFlat, Model::LongFlatShort],
    }
}
