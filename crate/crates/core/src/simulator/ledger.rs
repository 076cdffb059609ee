use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbm::CostFactors;

/// What happened to the pairs position Z at an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "open_long_Z")]
    OpenLong,
    #[serde(rename = "close_long_Z")]
    CloseLong,
    #[serde(rename = "open_short_Z")]
    OpenShort,
    #[serde(rename = "close_short_Z")]
    CloseShort,
    /// A position is still open at the horizon. Carries no cash flow.
    #[serde(rename = "expire")]
    Expire,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::OpenLong => "open_long_Z",
            Action::CloseLong => "close_long_Z",
            Action::OpenShort => "open_short_Z",
            Action::CloseShort => "close_short_Z",
            Action::Expire => "expire",
        }
    }

    /// Undiscounted cash flow of the action at prices `(x1, x2)`.
    ///
    /// Selling Z (close long, open short) sells stock 1 and buys stock 2;
    /// buying Z does the reverse.
    pub fn flow(self, x1: f64, x2: f64, costs: &CostFactors) -> f64 {
        let CostFactors { beta_s, beta_b } = *costs;
        match self {
            Action::CloseLong | Action::OpenShort => beta_s * x1 - beta_b * x2,
            Action::OpenLong | Action::CloseShort => -(beta_b * x1 - beta_s * x2),
            Action::Expire => 0.0,
        }
    }

    /// `exp(-rho t)` times [`Action::flow`].
    pub fn discounted_flow(self, time: f64, x1: f64, x2: f64, rho: f64, costs: &CostFactors) -> f64 {
        (-rho * time).exp() * self.flow(x1, x2, costs)
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeEvent {
    pub time: f64,
    pub action: Action,
    pub x1: f64,
    pub x2: f64,
    pub cash_flow: f64,
}

/// Events of one round trip, in time order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TradeLedger {
    pub events: Vec<TradeEvent>,
}

impl TradeLedger {
    /// Sum of the discounted cash flows.
    pub fn total(&self) -> f64 {
        self.events.iter().map(|e| e.cash_flow).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["time", "action", "x1", "x2", "cash_flow"]).map_err(io)?;
        for e in &self.events {
            w.write_record([
                e.time.to_string(),
                e.action.to_string(),
                e.x1.to_string(),
                e.x2.to_string(),
                e.cash_flow.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger serializes")
    }
}
