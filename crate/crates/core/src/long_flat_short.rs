//! The long/flat/short model: the trader may also hold the pairs position
//! short. Both thresholds have closed forms.

use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::gbm::{CharacteristicRoots, CostFactors, Generator, ValidatedParams};
use crate::long_flat::{close_threshold, long_flat_c2};
use crate::position::Position;
use crate::value_fn::{classify_ratio, EulerBranch, Jet, Region, RegionValue};
use crate::verify::{run_checks, smooth_fit, Check, LogGrid, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeRegimePolicy {
    /// Sell Z (close a long, or open a short) once `y <= k1_star`.
    pub k1_star: f64,
    /// Buy Z (close a short, or open a long) once `y >= k2_star`.
    pub k2_star: f64,
    pub c1: f64,
    pub c2: f64,
    pub b1: f64,
    pub b2: f64,
    pub roots: CharacteristicRoots,
    pub costs: CostFactors,
    pub generator: Generator,
}

/// `(delta1 / (delta1 - 1)) * (beta_b / beta_s)`.
fn open_threshold(roots: &CharacteristicRoots, costs: &CostFactors) -> f64 {
    roots.delta1 / (roots.delta1 - 1.0) * costs.beta()
}

/// `(beta_s / delta1)^delta1 * ((delta1 - 1) / beta_b)^(delta1 - 1)`.
fn three_regime_c1(roots: &CharacteristicRoots, costs: &CostFactors) -> f64 {
    let d1 = roots.delta1;
    (d1 * (costs.beta_s / d1).ln() + (d1 - 1.0) * ((d1 - 1.0) / costs.beta_b).ln()).exp()
}

pub fn solve_policy_three(v: &ValidatedParams) -> ThreeRegimePolicy {
    let roots = v.roots();
    let costs = v.costs();
    let c1 = three_regime_c1(&roots, &costs);
    let c2 = long_flat_c2(&roots, &costs);
    ThreeRegimePolicy {
        k1_star: close_threshold(&roots, &costs),
        k2_star: open_threshold(&roots, &costs),
        c1,
        c2,
        b1: c1,
        b2: c2,
        roots,
        costs,
        generator: v.generator(),
    }
}

/// `F1` and `F2` of the four-threshold smooth-fit system, evaluated at a
/// candidate `(k2, k3)`. Both vanish at `(k1_star, k2_star)`.
pub fn system_residuals(k2: f64, k3: f64, v: &ValidatedParams) -> Result<(f64, f64)> {
    system_residuals_with(k2, k3, &v.roots(), &v.costs())
}

/// [`system_residuals`] for explicit roots and cost factors.
pub fn system_residuals_with(k2: f64, k3: f64, roots: &CharacteristicRoots, costs: &CostFactors) -> Result<(f64, f64)> {
    let [t1, t2] = system_terms(k2, k3, roots, costs)?;
    let as_written = |terms: [(f64, f64); 5]| terms.iter().map(|&(coef, ln_power)| coef * ln_power.exp()).sum();
    Ok((as_written(t1), as_written(t2)))
}

/// `F1` and `F2` each divided by the magnitude of its largest term,
/// computed in log space. For extreme roots the individual terms of the
/// system overflow `f64` even though the relative residual is tiny.
pub fn system_residuals_relative(
    k2: f64,
    k3: f64,
    roots: &CharacteristicRoots,
    costs: &CostFactors,
) -> Result<(f64, f64)> {
    let [t1, t2] = system_terms(k2, k3, roots, costs)?;
    let relative = |terms: [(f64, f64); 5]| {
        let ln_size = |&(coef, ln_power): &(f64, f64)| coef.abs().ln() + ln_power;
        let top = terms.iter().map(ln_size).fold(f64::NEG_INFINITY, f64::max);
        terms.iter().map(|t| t.0.signum() * (ln_size(t) - top).exp()).sum::<f64>()
    };
    Ok((relative(t1), relative(t2)))
}

/// The five terms of each equation as `(coefficient, ln of power)`.
fn system_terms(k2: f64, k3: f64, roots: &CharacteristicRoots, costs: &CostFactors) -> Result<[[(f64, f64); 5]; 2]> {
    positive("candidate k2", k2)?;
    positive("candidate k3", k3)?;
    let CharacteristicRoots { delta1: d1, delta2: d2, .. } = *roots;
    let gamma = costs.beta();
    let (l1, l2, l3) = (close_threshold(roots, costs).ln(), k2.ln(), k3.ln());
    let l4 = open_threshold(roots, costs).ln();
    let spread = d1 - d2;
    let f1 = [
        ((1.0 - d2) / spread, (1.0 - d1) * l3),
        (d2 / spread, -d1 * l2),
        (gamma * d2 / spread, -d1 * l3),
        (gamma * (1.0 - d2) / spread, (1.0 - d1) * l2),
        (-1.0 / d1, (1.0 - d1) * l4),
    ];
    let f2 = [
        ((1.0 - d1) / spread, (1.0 - d2) * l3),
        (d1 / spread, -d2 * l2),
        (gamma * d1 / spread, -d2 * l3),
        (gamma * (1.0 - d1) / spread, (1.0 - d2) * l2),
        (-gamma / -d2, (1.0 - d2) * l1),
    ];
    Ok([f1, f2])
}

/// Output of the trade-signal function: what to do with one share of Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TradeSignal {
    /// -1 sell, 0 hold, +1 buy.
    pub action: i8,
    pub position: Position,
}

impl ThreeRegimePolicy {
    pub fn w1_branches(&self) -> RegionValue {
        let CostFactors { beta_s, beta_b } = self.costs;
        let tail = EulerBranch { down: self.c2, ..EulerBranch::default() };
        RegionValue { branches: [EulerBranch::linear(beta_s, -beta_b), tail, tail] }
    }

    pub fn w_minus1_branches(&self) -> RegionValue {
        let CostFactors { beta_s, beta_b } = self.costs;
        let wait = EulerBranch { up: self.c1, ..EulerBranch::default() };
        RegionValue { branches: [wait, wait, EulerBranch::linear(-beta_b, beta_s)] }
    }

    pub fn w0_branches(&self) -> RegionValue {
        let CostFactors { beta_s, beta_b } = self.costs;
        RegionValue {
            branches: [
                EulerBranch { up: self.c1, down: 0.0, constant: beta_s, slope: -beta_b },
                EulerBranch { up: self.c1, down: self.c2, constant: 0.0, slope: 0.0 },
                EulerBranch { up: 0.0, down: self.c2, constant: -beta_b, slope: beta_s },
            ],
        }
    }

    fn check_ratio(y: f64) -> Result<f64> {
        if y >= 0.0 && y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Domain { what: "ratio y", value: y })
        }
    }

    /// Region of `y`, with `y = 0` in `Gamma1`.
    pub fn classify(&self, y: f64) -> Result<Region> {
        Self::check_ratio(y)?;
        Ok(classify_ratio(y, self.k1_star, self.k2_star))
    }

    fn jet(&self, f: RegionValue, y: f64) -> Result<Jet> {
        let region = self.classify(y)?;
        Ok(f.branch(region).eval(&self.roots, y))
    }

    pub fn w1_jet(&self, y: f64) -> Result<Jet> {
        self.jet(self.w1_branches(), y)
    }

    pub fn w_minus1_jet(&self, y: f64) -> Result<Jet> {
        self.jet(self.w_minus1_branches(), y)
    }

    pub fn w0_jet(&self, y: f64) -> Result<Jet> {
        self.jet(self.w0_branches(), y)
    }

    pub fn w1(&self, y: f64) -> Result<f64> {
        self.w1_jet(y).map(|j| j.value)
    }

    pub fn w_minus1(&self, y: f64) -> Result<f64> {
        self.w_minus1_jet(y).map(|j| j.value)
    }

    pub fn w0(&self, y: f64) -> Result<f64> {
        self.w0_jet(y).map(|j| j.value)
    }

    pub fn value(&self, x1: f64, x2: f64, position: Position) -> Result<f64> {
        positive("price x1", x1)?;
        positive("price x2", x2)?;
        let y = x2 / x1;
        let w = match position {
            Position::Short => self.w_minus1(y)?,
            Position::Flat => self.w0(y)?,
            Position::Long => self.w1(y)?,
        };
        Ok(x1 * w)
    }

    pub fn signal(&self, x1: f64, x2: f64, position: Position) -> Result<TradeSignal> {
        signal(x1, x2, position, self)
    }

    pub fn verify(&self, grid: &LogGrid) -> Result<VerificationReport> {
        verify_policy_three(self, grid)
    }
}

/// The trade-signal function with thresholds `k1_star` (sell) and `k2_star`
/// (buy). Boundary prices trigger.
pub fn signal(x1: f64, x2: f64, position: Position, policy: &ThreeRegimePolicy) -> Result<TradeSignal> {
    positive("price x1", x1)?;
    positive("price x2", x2)?;
    let sell = x2 <= x1 * policy.k1_star;
    let buy = x2 >= x1 * policy.k2_star;
    let action = match position {
        Position::Long | Position::Flat if sell => -1,
        Position::Short | Position::Flat if buy => 1,
        _ => 0,
    };
    Ok(TradeSignal { action, position })
}

pub fn verify_policy_three(policy: &ThreeRegimePolicy, grid: &LogGrid) -> Result<VerificationReport> {
    use Region::*;
    let w1 = policy.w1_branches();
    let wm = policy.w_minus1_branches();
    let w0 = policy.w0_branches();
    let roots = policy.roots;
    let g = policy.generator;
    let CostFactors { beta_s, beta_b } = policy.costs;
    let at = move |f: &RegionValue, y: f64, r: Region| f.branch(r).eval(&roots, y);
    let apply = move |j: Jet, y: f64| g.apply(y, j.value, j.first, j.second);

    let checks = vec![
        Check {
            label: "(rho-L)w1 >= 0",
            regions: &[Gamma1],
            residual: Box::new(move |y: f64, r: Region| apply(at(&w1, y, r), y)),
        },
        Check {
            label: "w1 - beta_s + beta_b*y >= 0",
            regions: &[Gamma2, Gamma3],
            residual: Box::new(move |y: f64, r: Region| at(&w1, y, r).value - beta_s + beta_b * y),
        },
        Check {
            label: "w-1 + beta_b - beta_s*y >= 0",
            regions: &[Gamma1, Gamma2],
            residual: Box::new(move |y: f64, r: Region| at(&wm, y, r).value + beta_b - beta_s * y),
        },
        Check {
            label: "(rho-L)w-1 >= 0",
            regions: &[Gamma3],
            residual: Box::new(move |y: f64, r: Region| apply(at(&wm, y, r), y)),
        },
        Check {
            label: "(rho-L)w0 >= 0",
            regions: &[Gamma1, Gamma3],
            residual: Box::new(move |y: f64, r: Region| apply(at(&w0, y, r), y)),
        },
        Check {
            label: "w0 - w1 + beta_b - beta_s*y >= 0",
            regions: &[Gamma1, Gamma2],
            residual: Box::new(move |y: f64, r: Region| at(&w0, y, r).value - at(&w1, y, r).value + beta_b - beta_s * y),
        },
        Check {
            label: "w0 - w-1 - beta_s + beta_b*y >= 0",
            regions: &[Gamma2, Gamma3],
            residual: Box::new(move |y: f64, r: Region| at(&w0, y, r).value - at(&wm, y, r).value - beta_s + beta_b * y),
        },
    ];

    let (k1, k2) = (policy.k1_star, policy.k2_star);
    let mut fits = Vec::with_capacity(6);
    for (name, f) in [("w1", &w1), ("w-1", &wm), ("w0", &w0)] {
        fits.push(smooth_fit(name, "k1*", k1, at(f, k1, Gamma1), at(f, k1, Gamma2)));
    }
    for (name, f) in [("w1", &w1), ("w-1", &wm), ("w0", &w0)] {
        fits.push(smooth_fit(name, "k2*", k2, at(f, k2, Gamma2), at(f, k2, Gamma3)));
    }
    run_checks("long-flat-short", grid, k1, k2, &checks, fits)
}
