use serde::{Deserialize, Serialize};

use crate::calibration::PriceSeries;
use crate::error::{Error, Result};
use crate::gbm::CostFactors;
use crate::long_flat::RoundTripPolicy;
use crate::long_flat_short::ThreeRegimePolicy;
use crate::position::Position;

use super::ledger::{Action, TradeEvent, TradeLedger};
use super::path::{PathView, PricePath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "long-flat")]
    LongFlat,
    #[serde(rename = "long-flat-short")]
    LongFlatShort,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::LongFlat => "long-flat",
            Model::LongFlatShort => "long-flat-short",
        }
    }
}

/// A two-threshold stopping rule on the ratio `y = x2 / x1`: sell Z at or
/// below `lower`, buy Z at or above `upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub model: Model,
    pub lower: f64,
    pub upper: f64,
    pub costs: CostFactors,
}

impl ThresholdRule {
    pub fn scaled(&self, lower_factor: f64, upper_factor: f64) -> Self {
        ThresholdRule { lower: self.lower * lower_factor, upper: self.upper * upper_factor, ..*self }
    }

    pub fn supports(&self, start: Position) -> bool {
        !(self.model == Model::LongFlat && start == Position::Short)
    }
}

impl From<&RoundTripPolicy> for ThresholdRule {
    fn from(p: &RoundTripPolicy) -> Self {
        ThresholdRule { model: Model::LongFlat, lower: p.k1, upper: p.k2, costs: p.costs }
    }
}

impl From<&ThreeRegimePolicy> for ThresholdRule {
    fn from(p: &ThreeRegimePolicy) -> Self {
        ThresholdRule { model: Model::LongFlatShort, lower: p.k1_star, upper: p.k2_star, costs: p.costs }
    }
}

/// First-passage queries on a log-ratio sequence.
pub(crate) trait Passage {
    /// First `k >= from` with `ln y_k <= level`.
    fn first_at_or_below(&self, from: usize, level: f64) -> Option<usize>;
    /// First `k >= from` with `ln y_k >= level`.
    fn first_at_or_above(&self, from: usize, level: f64) -> Option<usize>;
}

impl Passage for PathView<'_> {
    fn first_at_or_below(&self, from: usize, level: f64) -> Option<usize> {
        (from..self.len()).find(|&k| self.ln_ratio(k) <= level)
    }

    fn first_at_or_above(&self, from: usize, level: f64) -> Option<usize> {
        (from..self.len()).find(|&k| self.ln_ratio(k) >= level)
    }
}

/// Grid indices of the (at most two) trades of one round trip, and whether a
/// position is still open at the end.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Schedule {
    pub trades: [Option<(usize, Action)>; 2],
    pub open_at_end: bool,
}

/// Runs the stopping rule. Comparisons are made on log prices.
pub(crate) fn schedule<P: Passage>(path: &P, rule: &ThresholdRule, start: Position) -> Result<Schedule> {
    if !rule.supports(start) {
        return Err(Error::UnsupportedPosition(start.as_i8()));
    }
    let lo = rule.lower.ln();
    let hi = rule.upper.ln();
    let close = |action: Action, at: Option<usize>| -> Schedule {
        match at {
            Some(k) => Schedule { trades: [Some((k, action)), None], open_at_end: false },
            None => Schedule { trades: [None, None], open_at_end: true },
        }
    };
    let round_trip = |k: usize, open: Action, close_action: Action, closing: Option<usize>| -> Schedule {
        Schedule { trades: [Some((k, open)), closing.map(|j| (j, close_action))], open_at_end: closing.is_none() }
    };

    Ok(match start {
        Position::Long => close(Action::CloseLong, path.first_at_or_below(0, lo)),
        Position::Short => close(Action::CloseShort, path.first_at_or_above(0, hi)),
        Position::Flat => match rule.model {
            Model::LongFlat => match path.first_at_or_above(0, hi) {
                Some(k) => round_trip(k, Action::OpenLong, Action::CloseLong, path.first_at_or_below(k, lo)),
                None => Schedule::default(),
            },
            Model::LongFlatShort => {
                let down = path.first_at_or_below(0, lo);
                // Only the part of the path before the first downward exit
                // matters for the upward one.
                let up = path.first_at_or_above(0, hi).filter(|&u| down.map_or(true, |d| u < d));
                match (down, up) {
                    (_, Some(u)) => round_trip(u, Action::OpenLong, Action::CloseLong, path.first_at_or_below(u, lo)),
                    (Some(d), None) => {
                        round_trip(d, Action::OpenShort, Action::CloseShort, path.first_at_or_above(d, hi))
                    }
                    (None, None) => Schedule::default(),
                }
            }
        },
    })
}

fn build_ledger(
    view: &PathView<'_>,
    prices: impl Fn(usize) -> (f64, f64),
    plan: &Schedule,
    rule: &ThresholdRule,
    rho: f64,
) -> TradeLedger {
    let mut events = Vec::with_capacity(3);
    let event = |k: usize, action: Action| {
        let time = view.time(k);
        let (x1, x2) = prices(k);
        TradeEvent { time, action, x1, x2, cash_flow: action.discounted_flow(time, x1, x2, rho, &rule.costs) }
    };
    for &(k, action) in plan.trades.iter().flatten() {
        events.push(event(k, action));
    }
    if plan.open_at_end {
        events.push(event(view.len() - 1, Action::Expire));
    }
    TradeLedger { events }
}

/// Executes `rule` from position `start` on `view`.
pub fn run_rule(view: &PathView<'_>, rule: &ThresholdRule, start: Position, rho: f64) -> Result<TradeLedger> {
    let plan = schedule(view, rule, start)?;
    Ok(build_ledger(view, |k| view.prices(k), &plan, rule, rho))
}

/// The long/flat round trip: open at `k2`, close at `k1`.
pub fn run_round_trip(path: &PathView<'_>, policy: &RoundTripPolicy, start: Position, rho: f64) -> Result<TradeLedger> {
    run_rule(path, &ThresholdRule::from(policy), start, rho)
}

/// The long/flat/short round trip: from flat, the first exit from the hold
/// region picks the direction.
pub fn run_three_regime(
    path: &PathView<'_>,
    policy: &ThreeRegimePolicy,
    start: Position,
    rho: f64,
) -> Result<TradeLedger> {
    run_rule(path, &ThresholdRule::from(policy), start, rho)
}

/// Replays `rule` on observed prices, one observation every `dt` years.
/// Trades happen at the first observation inside a trading region, at the
/// observed prices.
pub fn backtest(series: &PriceSeries, rule: &ThresholdRule, start: Position, rho: f64, dt: f64) -> Result<TradeLedger> {
    let path = PricePath::from_prices(dt, series.price1(), series.price2())?;
    let view = path.view(1);
    let plan = schedule(&view, rule, start)?;
    let (p1, p2) = (series.price1(), series.price2());
    Ok(build_ledger(&view, |k| (p1[k], p2[k]), &plan, rule, rho))
}
