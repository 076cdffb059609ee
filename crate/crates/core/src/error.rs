use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{field}` is not a finite number")]
    NonFinite { field: &'static str },

    #[error("degenerate diffusion: lambda = {lambda:e} is not above {tolerance:e}")]
    DegenerateDiffusion { lambda: f64, tolerance: f64 },

    #[error("discount rate rho = {rho} must exceed both drifts (mu1 = {mu1}, mu2 = {mu2})")]
    DiscountTooLow { rho: f64, mu1: f64, mu2: f64 },

    #[error("transaction cost rate K = {k} is outside [0, 1)")]
    BadCost { k: f64 },

    #[error("{what} must be positive, got {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid position {0}; expected -1, 0 or 1")]
    InvalidPosition(i64),

    #[error("unknown position `{0}`; expected long, flat, short, 1, 0 or -1")]
    UnknownPosition(String),

    #[error("position {0} is not available in the long/flat model")]
    UnsupportedPosition(i8),

    #[error("threshold equation has no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid path configuration: {0}")]
    PathConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: dates must be strictly increasing")]
    Order { line: u64 },

    #[error("need at least {min} observations, got {len}")]
    TooShort { len: usize, min: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain { what, value })
    }
}
