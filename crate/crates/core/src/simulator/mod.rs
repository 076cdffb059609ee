//! Simulated and historical execution of threshold policies.
//!
//! Paths are simulated with exact log-normal steps. Stopping times are
//! first passages observed on the time grid, without any correction for
//! crossings between grid points, so coarser grids trade later and at
//! worse ratios.

mod ledger;
mod mc;
mod path;
mod rule;

pub use ledger::{Action, TradeEvent, TradeLedger};
pub use mc::{mc_samples, mc_value, McEstimate, McTask};
pub use path::{simulate_paths, PathConfig, PathGenerator, PathView, PricePath};
pub use rule::{backtest, run_round_trip, run_rule, run_three_regime, Model, ThresholdRule};
