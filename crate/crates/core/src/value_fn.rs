//! Piecewise value functions on the ratio line.
//!
//! Every branch of every value function in both models has the form
//!
//! ```text
//! w(y) = up * y^delta1 + down * y^delta2 + constant + slope * y
//! ```
//!
//! so one small type carries values and analytic derivatives for all of them.

use serde::{Deserialize, Serialize};

use crate::gbm::CharacteristicRoots;

/// One of the three intervals cut out by a pair of thresholds `lower < upper`:
/// `(0, lower]`, `(lower, upper)`, `[upper, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    Gamma1,
    Gamma2,
    Gamma3,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Gamma1, Region::Gamma2, Region::Gamma3];

    pub fn index(self) -> usize {
        match self {
            Region::Gamma1 => 0,
            Region::Gamma2 => 1,
            Region::Gamma3 => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Region::Gamma1 => "Gamma1",
            Region::Gamma2 => "Gamma2",
            Region::Gamma3 => "Gamma3",
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Classify `y` against `lower` / `upper` with the closed-open-closed
/// convention of [`Region`]. `lower` wins if the thresholds cross.
pub fn classify_ratio(y: f64, lower: f64, upper: f64) -> Region {
    if y <= lower {
        Region::Gamma1
    } else if y >= upper {
        Region::Gamma3
    } else {
        Region::Gamma2
    }
}

/// Value and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        Jet { value: self.value + rhs.value, first: self.first + rhs.first, second: self.second + rhs.second }
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        Jet { value: self.value - rhs.value, first: self.first - rhs.first, second: self.second - rhs.second }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerBranch {
    pub up: f64,
    pub down: f64,
    pub constant: f64,
    pub slope: f64,
}

impl EulerBranch {
    pub const fn linear(constant: f64, slope: f64) -> Self {
        EulerBranch { up: 0.0, down: 0.0, constant, slope }
    }

    pub fn eval(&self, roots: &CharacteristicRoots, y: f64) -> Jet {
        let mut jet = Jet { value: self.constant + self.slope * y, first: self.slope, second: 0.0 };
        // Zero coefficients are skipped so that y -> 0 stays finite.
        for (coef, delta) in [(self.up, roots.delta1), (self.down, roots.delta2)] {
            if coef == 0.0 {
                continue;
            }
            if y > 0.0 {
                let p = coef * y.powf(delta);
                jet.value += p;
                jet.first += delta * p / y;
                jet.second += delta * (delta - 1.0) * p / (y * y);
            } else {
                jet.value += coef * y.powf(delta);
                jet.first += coef * delta * y.powf(delta - 1.0);
                jet.second += coef * delta * (delta - 1.0) * y.powf(delta - 2.0);
            }
        }
        jet
    }

    pub fn value(&self, roots: &CharacteristicRoots, y: f64) -> f64 {
        self.eval(roots, y).value
    }
}

/// A value function with one branch per region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionValue {
    pub branches: [EulerBranch; 3],
}

impl RegionValue {
    pub fn branch(&self, region: Region) -> &EulerBranch {
        &self.branches[region.index()]
    }
}
