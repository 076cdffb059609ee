//! Optimal round-trip thresholds for trading a pair of stocks whose prices
//! follow correlated geometric Brownian motions.
//!
//! The pairs position `Z` is long one share of stock 1 and short one share
//! of stock 2. Everything reduces to the price ratio `y = x2 / x1`: `Z` is
//! bought when `y` is high and sold when it is low.
//!
//! ```
//! use pairstop::{solve_policy, solve_policy_three, MarketParams};
//!
//! let v = MarketParams::REFERENCE.validate()?;
//! let lf = solve_policy(&v)?;
//! let lfs = solve_policy_three(&v);
//! assert!((lf.k1 - 0.85527).abs() < 1e-5 && (lf.k2 - 1.28061).abs() < 1e-5);
//! assert!((lfs.k2_star - 1.32175).abs() < 1e-5);
//! # Ok::<(), pairstop::Error>(())
//! ```

// Range checks are written `!(x > y)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod gbm;
pub mod long_flat;
pub mod long_flat_short;
pub mod numeric;
pub mod position;
pub mod simulator;
pub mod sweep;
pub mod value_fn;
pub mod verify;

pub use calibration::{estimate, load_csv, load_csv_from, CalibrationResult, PriceSeries};
pub use error::{Error, Result};
pub use gbm::{
    characteristic_roots, effective_covariance, validate_params, CharacteristicRoots, CostFactors, DiffusionDerived,
    Generator, MarketParams, ValidatedParams,
};
pub use long_flat::{solve_policy, verify_policy, RoundTripPolicy, ThresholdEquation};
pub use long_flat_short::{
    signal, solve_policy_three, system_residuals, system_residuals_relative, system_residuals_with, verify_policy_three, ThreeRegimePolicy,
    TradeSignal,
};
pub use position::Position;
pub use simulator::{McEstimate, Model, PathConfig, ThresholdRule, TradeLedger};
pub use sweep::{all_tables, sweep, SensitivityTable, SweepParam, TableRow};
pub use value_fn::{EulerBranch, Jet, Region, RegionValue};
pub use verify::{InequalityReport, LogGrid, SmoothFitResidual, VerificationReport};
