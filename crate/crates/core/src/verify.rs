//! Grid-based verification of the variational inequalities that certify a
//! candidate as the solution of the HJB system.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::value_fn::{classify_ratio, Region};

/// Inequality residuals must not fall below `-INEQUALITY_TOLERANCE`.
pub const INEQUALITY_TOLERANCE: f64 = 1e-8;
/// Value and slope gaps across a threshold must stay below this.
pub const SMOOTH_FIT_TOLERANCE: f64 = 1e-9;

/// Log-spaced evaluation grid on `[y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogGrid {
    pub y_min: f64,
    pub y_max: f64,
    pub points: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        LogGrid { y_min: 1e-3, y_max: 1e3, points: 10_000 }
    }
}

impl LogGrid {
    pub fn new(y_min: f64, y_max: f64, points: usize) -> Result<Self> {
        let grid = LogGrid { y_min, y_max, points };
        grid.check()?;
        Ok(grid)
    }

    fn check(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Grid(format!("need at least 2 points, got {}", self.points)));
        }
        if !(self.y_min > 0.0 && self.y_min.is_finite() && self.y_max.is_finite()) {
            return Err(Error::Grid(format!("bounds must be positive and finite, got [{}, {}]", self.y_min, self.y_max)));
        }
        if self.y_min >= self.y_max {
            return Err(Error::Grid(format!("empty range [{}, {}]", self.y_min, self.y_max)));
        }
        Ok(())
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        self.check()?;
        let (lo, hi) = (self.y_min.ln(), self.y_max.ln());
        let step = (hi - lo) / (self.points - 1) as f64;
        let mut ys: Vec<f64> = (0..self.points).map(|i| (lo + step * i as f64).exp()).collect();
        ys[0] = self.y_min;
        ys[self.points - 1] = self.y_max;
        Ok(ys)
    }
}

/// Worst residual of one inequality over the points where it applies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub label: String,
    pub regions: Vec<Region>,
    pub evaluated: usize,
    pub worst_residual: f64,
    pub worst_at: f64,
    pub passed: bool,
    /// Every evaluated `(y, residual)` pair, grid order first, then the
    /// one-sided threshold evaluations.
    #[serde(skip)]
    pub residuals: Vec<(f64, f64)>,
}

impl InequalityReport {
    /// Regions that contain at least one failing point.
    pub fn failing_regions(&self, lower: f64, upper: f64) -> Vec<Region> {
        let mut out: Vec<Region> = self
            .residuals
            .iter()
            .filter(|(_, r)| *r < -INEQUALITY_TOLERANCE)
            .map(|&(y, _)| classify_ratio(y, lower, upper))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Gap between the two one-sided limits of a value function (and of its
/// slope) at a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothFitResidual {
    pub function: String,
    pub threshold: String,
    pub at: f64,
    pub value_gap: f64,
    pub slope_gap: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub model: String,
    pub grid: LogGrid,
    pub thresholds: [f64; 2],
    pub inequalities: Vec<InequalityReport>,
    pub smooth_fit: Vec<SmoothFitResidual>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn worst(&self) -> Option<&InequalityReport> {
        self.inequalities.iter().min_by(|a, b| a.worst_residual.total_cmp(&b.worst_residual))
    }

    pub fn inequality(&self, label: &str) -> Option<&InequalityReport> {
        self.inequalities.iter().find(|i| i.label == label)
    }
}

/// One inequality: where it applies and how to evaluate it at `y` when the
/// value functions are taken on the branches of `branch_region`.
pub(crate) struct Check<'a> {
    pub label: &'static str,
    pub regions: &'static [Region],
    pub residual: Box<dyn Fn(f64, Region) -> f64 + Sync + 'a>,
}

pub(crate) fn run_checks(
    model: &str,
    grid: &LogGrid,
    lower: f64,
    upper: f64,
    checks: &[Check<'_>],
    smooth_fit: Vec<SmoothFitResidual>,
) -> Result<VerificationReport> {
    let ys = grid.values()?;

    // Grid points are independent; collecting preserves grid order, so the
    // reduction below does not depend on how the work was scheduled.
    let per_point: Vec<Vec<Option<f64>>> = ys
        .par_iter()
        .map(|&y| {
            let region = classify_ratio(y, lower, upper);
            checks
                .iter()
                .map(|c| c.regions.contains(&region).then(|| (c.residual)(y, region)))
                .collect()
        })
        .collect();

    // Thresholds: evaluate on both adjacent branches.
    let sides = [
        (lower, classify_ratio(lower, lower, upper), Region::Gamma2),
        (upper, classify_ratio(upper, lower, upper), Region::Gamma2),
    ];

    let mut inequalities = Vec::with_capacity(checks.len());
    for (ci, check) in checks.iter().enumerate() {
        let mut residuals: Vec<(f64, f64)> = ys
            .iter()
            .zip(&per_point)
            .filter_map(|(&y, row)| row[ci].map(|r| (y, r)))
            .collect();
        for &(k, home, neighbour) in &sides {
            if check.regions.contains(&home) {
                residuals.push((k, (check.residual)(k, home)));
                if neighbour != home {
                    residuals.push((k, (check.residual)(k, neighbour)));
                }
            }
        }
        let (worst_at, worst_residual) = residuals
            .iter()
            .copied()
            .fold((f64::NAN, f64::INFINITY), |acc, (y, r)| if r < acc.1 || r.is_nan() { (y, r) } else { acc });
        inequalities.push(InequalityReport {
            label: check.label.to_string(),
            regions: check.regions.to_vec(),
            evaluated: residuals.len(),
            worst_residual,
            worst_at,
            passed: worst_residual >= -INEQUALITY_TOLERANCE,
            residuals,
        });
    }

    let passed = inequalities.iter().all(|i| i.passed) && smooth_fit.iter().all(|s| s.passed);
    Ok(VerificationReport {
        model: model.to_string(),
        grid: *grid,
        thresholds: [lower, upper],
        inequalities,
        smooth_fit,
        passed,
    })
}

pub(crate) fn smooth_fit(function: &str, threshold: &str, at: f64, left: crate::value_fn::Jet, right: crate::value_fn::Jet) -> SmoothFitResidual {
    let value_gap = (left.value - right.value).abs();
    let slope_gap = (left.first - right.first).abs();
    SmoothFitResidual {
        function: function.to_string(),
        threshold: threshold.to_string(),
        at,
        value_gap,
        slope_gap,
        passed: value_gap < SMOOTH_FIT_TOLERANCE && slope_gap < SMOOTH_FIT_TOLERANCE,
    }
}
