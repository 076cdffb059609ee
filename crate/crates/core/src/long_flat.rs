//! The long/flat model: one round trip of the pairs position, opened when
//! the ratio `y = x2 / x1` climbs to `k2` and closed when it falls to `k1`.

use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::gbm::{CharacteristicRoots, CostFactors, Generator, ValidatedParams};
use crate::numeric::bisect;
use crate::position::Position;
use crate::value_fn::{classify_ratio, EulerBranch, Jet, Region, RegionValue};
use crate::verify::{run_checks, smooth_fit, Check, LogGrid, VerificationReport};

const K2_RTOL: f64 = 1e-12;
const K2_MAX_ITER: usize = 200;

/// Solved long/flat policy and the coefficients of its value functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundTripPolicy {
    /// Close threshold: sell Z once `y <= k1`.
    pub k1: f64,
    /// Open threshold: buy Z once `y >= k2`.
    pub k2: f64,
    pub c1: f64,
    pub c2: f64,
    pub roots: CharacteristicRoots,
    pub costs: CostFactors,
    pub generator: Generator,
}

/// `f(y) = C2 (delta1 - delta2) y^delta2 + beta_s (delta1 - 1) y - beta_b delta1`,
/// whose larger root is `k2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdEquation {
    pub c2: f64,
    pub roots: CharacteristicRoots,
    pub costs: CostFactors,
}

impl ThresholdEquation {
    pub fn new(v: &ValidatedParams) -> Self {
        let roots = v.roots();
        let costs = v.costs();
        ThresholdEquation { c2: long_flat_c2(&roots, &costs), roots, costs }
    }

    fn power_coef(&self) -> f64 {
        self.c2 * (self.roots.delta1 - self.roots.delta2)
    }

    /// Unchecked evaluation; see [`ThresholdEquation::value`].
    ///
    /// The linear part is evaluated as `beta_s (delta1 - 1) (y - u)` with `u`
    /// the upper bracket, so that it is exactly zero there even when the
    /// power term is below the rounding error of the expanded form.
    pub fn eval(&self, y: f64) -> f64 {
        let CharacteristicRoots { delta1, delta2, .. } = self.roots;
        self.power_coef() * y.powf(delta2) + self.costs.beta_s * (delta1 - 1.0) * (y - self.upper_bracket())
    }

    pub fn value(&self, y: f64) -> Result<f64> {
        positive("ratio y", y)?;
        Ok(self.eval(y))
    }

    pub fn derivative(&self, y: f64) -> f64 {
        let CharacteristicRoots { delta1, delta2, .. } = self.roots;
        self.power_coef() * delta2 * y.powf(delta2 - 1.0) + self.costs.beta_s * (delta1 - 1.0)
    }

    pub fn second_derivative(&self, y: f64) -> f64 {
        let delta2 = self.roots.delta2;
        self.power_coef() * delta2 * (delta2 - 1.0) * y.powf(delta2 - 2.0)
    }

    /// The minimiser of `f`, where `f < 0`.
    pub fn y_c(&self) -> f64 {
        let CharacteristicRoots { delta1, delta2, .. } = self.roots;
        (self.costs.beta_s * (delta1 - 1.0) / (self.power_coef() * -delta2)).powf(1.0 / (delta2 - 1.0))
    }

    /// Where the linear part of `f` vanishes, so `f > 0`.
    pub fn upper_bracket(&self) -> f64 {
        let delta1 = self.roots.delta1;
        self.costs.beta_b * delta1 / (self.costs.beta_s * (delta1 - 1.0))
    }

    /// The larger root of `f`.
    pub fn solve(&self) -> Result<f64> {
        let (lo, hi) = (self.y_c(), self.upper_bracket());
        if !(lo < hi) {
            return Err(Error::NoBracket { lo, hi });
        }
        let root = bisect(|y| self.eval(y), lo, hi, K2_RTOL, K2_MAX_ITER).ok_or(Error::NoBracket { lo, hi })?;
        Ok(self.polish(root.x, lo, hi))
    }

    /// Newton steps from a bisection estimate, kept only while they stay in
    /// the bracket and shrink `|f|`. `f' > 0` at the larger root.
    fn polish(&self, mut y: f64, lo: f64, hi: f64) -> f64 {
        let mut fy = self.eval(y);
        for _ in 0..3 {
            let slope = self.derivative(y);
            if !(slope > 0.0) {
                break;
            }
            let next = y - fy / slope;
            let f_next = self.eval(next);
            if !(next > lo && next < hi && f_next.abs() < fy.abs()) {
                break;
            }
            y = next;
            fy = f_next;
        }
        y
    }
}

/// `(beta_s / (1 - delta2))^(1 - delta2) * (beta_b / (-delta2))^delta2`.
pub(crate) fn long_flat_c2(roots: &CharacteristicRoots, costs: &CostFactors) -> f64 {
    let d2 = roots.delta2;
    // Combined in log space: each factor alone can overflow for large |delta2|.
    ((1.0 - d2) * (costs.beta_s / (1.0 - d2)).ln() + d2 * (costs.beta_b / -d2).ln()).exp()
}

/// `(beta_s / beta_b) * (-delta2) / (1 - delta2)`, shared by both models.
pub(crate) fn close_threshold(roots: &CharacteristicRoots, costs: &CostFactors) -> f64 {
    costs.beta_s / costs.beta_b * -roots.delta2 / (1.0 - roots.delta2)
}

pub fn solve_policy(v: &ValidatedParams) -> Result<RoundTripPolicy> {
    let equation = ThresholdEquation::new(v);
    let k2 = equation.solve()?;
    let ThresholdEquation { c2, roots, costs } = equation;
    let CharacteristicRoots { delta1, delta2, .. } = roots;
    let c1 = (c2 * delta2 * k2.powf(delta2 - 1.0) + costs.beta_s) / (delta1 * k2.powf(delta1 - 1.0));
    Ok(RoundTripPolicy {
        k1: close_threshold(&roots, &costs),
        k2,
        c1,
        c2,
        roots,
        costs,
        generator: v.generator(),
    })
}

impl RoundTripPolicy {
    pub fn threshold_equation(&self) -> ThresholdEquation {
        ThresholdEquation { c2: self.c2, roots: self.roots, costs: self.costs }
    }

    /// Value per unit of stock-1 price when holding Z.
    pub fn w1_branches(&self) -> RegionValue {
        let CostFactors { beta_s, beta_b } = self.costs;
        let tail = EulerBranch { down: self.c2, ..EulerBranch::default() };
        RegionValue { branches: [EulerBranch::linear(beta_s, -beta_b), tail, tail] }
    }

    /// Value per unit of stock-1 price when flat.
    pub fn w0_branches(&self) -> RegionValue {
        let CostFactors { beta_s, beta_b } = self.costs;
        let wait = EulerBranch { up: self.c1, ..EulerBranch::default() };
        RegionValue {
            branches: [wait, wait, EulerBranch { down: self.c2, constant: -beta_b, slope: beta_s, up: 0.0 }],
        }
    }

    pub fn classify(&self, y: f64) -> Result<Region> {
        positive("ratio y", y)?;
        Ok(classify_ratio(y, self.k1, self.k2))
    }

    pub fn w1_jet(&self, y: f64) -> Result<Jet> {
        let region = self.classify(y)?;
        Ok(self.w1_branches().branch(region).eval(&self.roots, y))
    }

    pub fn w0_jet(&self, y: f64) -> Result<Jet> {
        let region = self.classify(y)?;
        Ok(self.w0_branches().branch(region).eval(&self.roots, y))
    }

    pub fn w1(&self, y: f64) -> Result<f64> {
        self.w1_jet(y).map(|j| j.value)
    }

    pub fn w0(&self, y: f64) -> Result<f64> {
        self.w0_jet(y).map(|j| j.value)
    }

    /// `x1 * w_i(x2 / x1)`: the optimal expected discounted reward starting
    /// from prices `(x1, x2)` in position `i`.
    pub fn value(&self, x1: f64, x2: f64, position: Position) -> Result<f64> {
        positive("price x1", x1)?;
        positive("price x2", x2)?;
        let y = x2 / x1;
        let w = match position {
            Position::Flat => self.w0(y)?,
            Position::Long => self.w1(y)?,
            Position::Short => return Err(Error::UnsupportedPosition(-1)),
        };
        Ok(x1 * w)
    }

    pub fn verify(&self, grid: &LogGrid) -> Result<VerificationReport> {
        verify_policy(self, grid)
    }
}

pub fn verify_policy(policy: &RoundTripPolicy, grid: &LogGrid) -> Result<VerificationReport> {
    use Region::*;
    let w1 = policy.w1_branches();
    let w0 = policy.w0_branches();
    let roots = policy.roots;
    let g = policy.generator;
    let CostFactors { beta_s, beta_b } = policy.costs;
    let at = move |f: &RegionValue, y: f64, r: Region| f.branch(r).eval(&roots, y);
    let apply = move |j: Jet, y: f64| g.apply(y, j.value, j.first, j.second);

    let gen_w1 = move |y: f64, r: Region| apply(at(&w1, y, r), y);
    let gen_w0 = move |y: f64, r: Region| apply(at(&w0, y, r), y);
    let close_gain = move |y: f64, r: Region| at(&w1, y, r).value - beta_s + beta_b * y;
    let open_gain = move |y: f64, r: Region| at(&w0, y, r).value - at(&w1, y, r).value + beta_b - beta_s * y;

    let checks = vec![
        Check { label: "Gamma1: (rho-L)w1 >= 0", regions: &[Gamma1], residual: Box::new(gen_w1) },
        Check { label: "Gamma1: w0 - w1 + beta_b - beta_s*y >= 0", regions: &[Gamma1], residual: Box::new(open_gain) },
        Check { label: "Gamma2: w1 - beta_s + beta_b*y >= 0", regions: &[Gamma2], residual: Box::new(close_gain) },
        Check { label: "Gamma2: w0 - w1 + beta_b - beta_s*y >= 0", regions: &[Gamma2], residual: Box::new(open_gain) },
        Check { label: "Gamma3: w1 - beta_s + beta_b*y >= 0", regions: &[Gamma3], residual: Box::new(close_gain) },
        Check { label: "Gamma3: (rho-L)w0 >= 0", regions: &[Gamma3], residual: Box::new(gen_w0) },
    ];

    let (k1, k2) = (policy.k1, policy.k2);
    let fits = vec![
        smooth_fit("w1", "k1", k1, at(&w1, k1, Gamma1), at(&w1, k1, Gamma2)),
        smooth_fit("w0", "k1", k1, at(&w0, k1, Gamma1), at(&w0, k1, Gamma2)),
        smooth_fit("w1", "k2", k2, at(&w1, k2, Gamma2), at(&w1, k2, Gamma3)),
        smooth_fit("w0", "k2", k2, at(&w0, k2, Gamma2), at(&w0, k2, Gamma3)),
    ];
    run_checks("long-flat", grid, k1, k2, &checks, fits)
}
