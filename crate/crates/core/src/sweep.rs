//! One-parameter sensitivity sweeps of the thresholds.

use serde::Serialize;

use crate::error::Result;
use crate::gbm::MarketParams;
use crate::long_flat::solve_policy;
use crate::long_flat_short::solve_policy_three;
use crate::simulator::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SweepParam {
    Mu1,
    Mu2,
    Sigma11,
    Sigma22,
    /// `sigma12` and `sigma21` together.
    Sigma12,
    Rho,
    K,
}

impl SweepParam {
    pub const ALL: [SweepParam; 7] = [
        SweepParam::Mu1,
        SweepParam::Mu2,
        SweepParam::Sigma11,
        SweepParam::Sigma22,
        SweepParam::Sigma12,
        SweepParam::Rho,
        SweepParam::K,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Mu1 => "mu1",
            SweepParam::Mu2 => "mu2",
            SweepParam::Sigma11 => "sigma11",
            SweepParam::Sigma22 => "sigma22",
            SweepParam::Sigma12 => "sigma12=sigma21",
            SweepParam::Rho => "rho",
            SweepParam::K => "K",
        }
    }

    /// Offsets from the base value: steps of 0.05 for rates and
    /// volatilities, 0.0005 for the cost rate.
    pub fn offsets(self) -> [f64; 5] {
        match self {
            SweepParam::K => [-0.001, -0.0005, 0.0, 0.0005, 0.001],
            _ => [-0.1, -0.05, 0.0, 0.05, 0.1],
        }
    }

    pub fn get(self, p: &MarketParams) -> f64 {
        match self {
            SweepParam::Mu1 => p.mu1,
            SweepParam::Mu2 => p.mu2,
            SweepParam::Sigma11 => p.sigma[0][0],
            SweepParam::Sigma22 => p.sigma[1][1],
            SweepParam::Sigma12 => p.sigma[0][1],
            SweepParam::Rho => p.rho,
            SweepParam::K => p.k,
        }
    }

    pub fn set(self, p: &MarketParams, value: f64) -> MarketParams {
        let mut q = *p;
        match self {
            SweepParam::Mu1 => q.mu1 = value,
            SweepParam::Mu2 => q.mu2 = value,
            SweepParam::Sigma11 => q.sigma[0][0] = value,
            SweepParam::Sigma22 => q.sigma[1][1] = value,
            SweepParam::Sigma12 => {
                q.sigma[0][1] = value;
                q.sigma[1][0] = value;
            }
            SweepParam::Rho => q.rho = value,
            SweepParam::K => q.k = value,
        }
        q
    }

    /// The five swept values around `base`.
    pub fn grid(self, base: &MarketParams) -> [f64; 5] {
        let centre = self.get(base);
        self.offsets().map(|d| centre + d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub value: f64,
    /// `k1` or `k1*`.
    pub lower: f64,
    /// `k2` or `k2*`.
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityTable {
    pub model: Model,
    pub param: SweepParam,
    pub rows: Vec<TableRow>,
}

impl SensitivityTable {
    pub fn title(&self) -> String {
        let ks = match self.model {
            Model::LongFlat => "k1 and k2",
            Model::LongFlatShort => "k1* and k2*",
        };
        format!("{ks} with varying {}", self.param.name())
    }

    pub fn column_names(&self) -> [&'static str; 3] {
        let value = match self.param {
            SweepParam::Mu1 => "mu1",
            SweepParam::Mu2 => "mu2",
            SweepParam::Sigma11 => "sigma11",
            SweepParam::Sigma22 => "sigma22",
            SweepParam::Sigma12 => "sigma12",
            SweepParam::Rho => "rho",
            SweepParam::K => "K",
        };
        match self.model {
            Model::LongFlat => [value, "k1", "k2"],
            Model::LongFlatShort => [value, "k1*", "k2*"],
        }
    }
}

pub fn sweep(base: &MarketParams, model: Model, param: SweepParam) -> Result<SensitivityTable> {
    let rows = param
        .grid(base)
        .into_iter()
        .map(|value| {
            let v = param.set(base, value).validate()?;
            let (lower, upper) = match model {
                Model::LongFlat => {
                    let p = solve_policy(&v)?;
                    (p.k1, p.k2)
                }
                Model::LongFlatShort => {
                    let p = solve_policy_three(&v);
                    (p.k1_star, p.k2_star)
                }
            };
            Ok(TableRow { value, lower, upper })
        })
        .collect::<Result<_>>()?;
    Ok(SensitivityTable { model, param, rows })
}

/// Fourteen tables: each parameter for the long/flat model, then each
/// parameter for the long/flat/short model.
pub fn all_tables(base: &MarketParams) -> Result<Vec<SensitivityTable>> {
    let mut out = Vec::with_capacity(14);
    for model in [Model::LongFlat, Model::LongFlatShort] {
        for param in SweepParam::ALL {
            out.push(sweep(base, model, param)?);
        }
    }
    Ok(out)
}
