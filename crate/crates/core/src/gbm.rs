//! Model parameters for two stocks following correlated geometric Brownian
//! motions, plus everything derived from them that the solvers need.
//!
//! Prices evolve as
//!
//! ```text
//! dX_i = X_i (mu_i dt + sum_j sigma_ij dW_j),    i = 1, 2
//! ```
//!
//! After the homogeneity reduction `v_i(x1, x2) = x1 w_i(x2 / x1)` the only
//! diffusion quantity that matters is `lambda`, half the variance rate of the
//! log price ratio, and the Euler equation `(rho - L) w = 0` has the power
//! solutions `y^delta1`, `y^delta2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `lambda` the problem degenerates to a first-order one, which
/// is not supported.
pub const LAMBDA_TOLERANCE: f64 = 1e-12;

/// Full parameterisation of the two-asset model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Drift of stock 1, per year.
    pub mu1: f64,
    /// Drift of stock 2, per year.
    pub mu2: f64,
    /// Volatility matrix `sigma[i][j]`, per square-root year.
    pub sigma: [[f64; 2]; 2],
    /// Discount rate, per year.
    pub rho: f64,
    /// Proportional transaction cost rate.
    #[serde(rename = "K")]
    pub k: f64,
}

impl MarketParams {
    /// WMT/TGT calibration (adjusted closes, first half of 2010-2020) with
    /// `rho = 0.5` and `K = 0.001`.
    pub const REFERENCE: MarketParams = MarketParams {
        mu1: 0.09696,
        mu2: 0.14347,
        sigma: [[0.19082, 0.04036], [0.04036, 0.13988]],
        rho: 0.5,
        k: 0.001,
    };

    /// Parameters with a symmetric volatility matrix (`sigma12 == sigma21`).
    pub fn symmetric(mu1: f64, mu2: f64, s11: f64, s12: f64, s22: f64, rho: f64, k: f64) -> Self {
        MarketParams { mu1, mu2, sigma: [[s11, s12], [s12, s22]], rho, k }
    }

    pub fn validate(&self) -> Result<ValidatedParams> {
        validate_params(self)
    }

    pub fn is_symmetric(&self) -> bool {
        self.sigma[0][1] == self.sigma[1][0]
    }
}

/// Proportional cost factors: a sale nets `beta_s` per unit of price, a
/// purchase costs `beta_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostFactors {
    pub beta_s: f64,
    pub beta_b: f64,
}

impl CostFactors {
    pub fn from_rate(k: f64) -> Self {
        CostFactors { beta_s: 1.0 - k, beta_b: 1.0 + k }
    }

    /// `beta_b / beta_s`; at least 1 for any admissible cost rate.
    pub fn beta(&self) -> f64 {
        self.beta_b / self.beta_s
    }
}

/// Effective covariance rates `a = sigma sigma^T` and `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionDerived {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub lambda: f64,
}

impl DiffusionDerived {
    /// `lambda` from the rows of `sigma`: `((s11 - s21)^2 + (s12 - s22)^2) / 2`.
    ///
    /// Algebraically equal to `lambda`, and never negative.
    pub fn lambda_from_rows(sigma: &[[f64; 2]; 2]) -> f64 {
        let d1 = sigma[0][0] - sigma[1][0];
        let d2 = sigma[0][1] - sigma[1][1];
        0.5 * (d1 * d1 + d2 * d2)
    }
}

/// `a11`, `a12`, `a22` and `lambda = (a11 - 2 a12 + a22) / 2`.
pub fn effective_covariance(p: &MarketParams) -> DiffusionDerived {
    let [[s11, s12], [s21, s22]] = p.sigma;
    let a11 = s11 * s11 + s12 * s12;
    let a12 = s11 * s21 + s12 * s22;
    let a22 = s21 * s21 + s22 * s22;
    DiffusionDerived { a11, a12, a22, lambda: 0.5 * (a11 - 2.0 * a12 + a22) }
}

/// Parameters that passed [`validate_params`], with their derived values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidatedParams {
    params: MarketParams,
    costs: CostFactors,
    diffusion: DiffusionDerived,
}

impl ValidatedParams {
    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    pub fn costs(&self) -> CostFactors {
        self.costs
    }

    pub fn diffusion(&self) -> DiffusionDerived {
        self.diffusion
    }

    /// `lambda` as used by the solvers (the non-negative row-difference form).
    pub fn lambda(&self) -> f64 {
        self.diffusion.lambda
    }

    /// Diagnostic: the calibration convention uses a symmetric `sigma`.
    pub fn has_asymmetric_sigma(&self) -> bool {
        !self.params.is_symmetric()
    }

    pub fn roots(&self) -> CharacteristicRoots {
        characteristic_roots(self)
    }

    pub fn generator(&self) -> Generator {
        Generator {
            rho: self.params.rho,
            mu1: self.params.mu1,
            mu2: self.params.mu2,
            lambda: self.diffusion.lambda,
        }
    }
}

/// Checks the standing assumptions: finite inputs, `0 <= K < 1`,
/// `rho > mu1`, `rho > mu2` and a non-degenerate `lambda`.
pub fn validate_params(p: &MarketParams) -> Result<ValidatedParams> {
    let fields = [
        ("mu1", p.mu1),
        ("mu2", p.mu2),
        ("sigma11", p.sigma[0][0]),
        ("sigma12", p.sigma[0][1]),
        ("sigma21", p.sigma[1][0]),
        ("sigma22", p.sigma[1][1]),
        ("rho", p.rho),
        ("K", p.k),
    ];
    for (field, value) in fields {
        if !value.is_finite() {
            return Err(Error::NonFinite { field });
        }
    }
    if !(0.0..1.0).contains(&p.k) {
        return Err(Error::BadCost { k: p.k });
    }
    if p.rho <= p.mu1 || p.rho <= p.mu2 {
        return Err(Error::DiscountTooLow { rho: p.rho, mu1: p.mu1, mu2: p.mu2 });
    }
    let mut diffusion = effective_covariance(p);
    // The row form cannot go negative through cancellation.
    diffusion.lambda = DiffusionDerived::lambda_from_rows(&p.sigma);
    if !(diffusion.lambda > LAMBDA_TOLERANCE) || !diffusion.lambda.is_finite() {
        return Err(Error::DegenerateDiffusion { lambda: diffusion.lambda, tolerance: LAMBDA_TOLERANCE });
    }
    Ok(ValidatedParams { params: *p, costs: CostFactors::from_rate(p.k), diffusion })
}

/// Roots of `delta^2 - (1 + (mu1 - mu2)/lambda) delta - (rho - mu1)/lambda = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicRoots {
    /// The larger root, always above 1.
    pub delta1: f64,
    /// The smaller root, always negative.
    pub delta2: f64,
    pub lambda: f64,
}

impl CharacteristicRoots {
    /// Value of the characteristic polynomial at `delta`.
    pub fn polynomial(&self, params: &MarketParams, delta: f64) -> f64 {
        let b = 1.0 + (params.mu1 - params.mu2) / self.lambda;
        let c = (params.rho - params.mu1) / self.lambda;
        delta * delta - b * delta - c
    }
}

pub fn characteristic_roots(v: &ValidatedParams) -> CharacteristicRoots {
    let p = v.params();
    let lambda = v.lambda();
    let b = 1.0 + (p.mu1 - p.mu2) / lambda;
    let c = (p.rho - p.mu1) / lambda;
    let disc = (b * b + 4.0 * c).sqrt();
    // Larger-magnitude root first, the other from the product -c.
    let (delta1, delta2) = if b >= 0.0 {
        let q = 0.5 * (b + disc);
        (q, -c / q)
    } else {
        let q = 0.5 * (b - disc);
        (-c / q, q)
    };
    CharacteristicRoots { delta1, delta2, lambda }
}

/// The discounted generator `rho - L` of the ratio `y = x2 / x1`, where
/// `L w = lambda y^2 w'' + (mu2 - mu1) y w' + mu1 w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Generator {
    pub rho: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub lambda: f64,
}

impl Generator {
    /// `(rho - L) w` at `y` from the value and its first two derivatives.
    pub fn apply(&self, y: f64, w: f64, dw: f64, d2w: f64) -> f64 {
        (self.rho - self.mu1) * w - self.lambda * y * y * d2w - (self.mu2 - self.mu1) * y * dw
    }

    /// Sum of the absolute values of the terms in [`Generator::apply`]; the
    /// natural scale for judging how close a residual is to zero.
    pub fn scale(&self, y: f64, w: f64, dw: f64, d2w: f64) -> f64 {
        ((self.rho - self.mu1) * w).abs()
            + (self.lambda * y * y * d2w).abs()
            + ((self.mu2 - self.mu1) * y * dw).abs()
    }
}
