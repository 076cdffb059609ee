//! Small numerical helpers shared by the solvers and the simulator.

/// Sum with pairwise (cascade) reduction.
///
/// The result depends only on the order of `values`, so any evaluation
/// strategy that materialises the same slice reproduces it bit for bit.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sample mean and unbiased sample variance, both pairwise-summed.
///
/// Deviations are taken from the first value before summing, so a constant
/// sample has exactly its value as mean and zero variance.
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let shift = values[0];
    let shifted: Vec<f64> = values.iter().map(|v| v - shift).collect();
    let mean = shift + pairwise_sum(&shifted) / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let deviations: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, pairwise_sum(&deviations) / (n - 1) as f64)
}

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops once the bracket width falls below `rtol * |x|` (or hits an
/// exact zero). Returns `None` if the end points do not bracket a root or
/// the iteration cap is reached first.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rtol: f64, max_iter: usize) -> Option<Root> {
    let (mut lo, mut hi) = (lo, hi);
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Some(Root { x: lo, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Some(Root { x: hi, iterations: 0 });
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return None;
    }
    for iteration in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(Root { x: mid, iterations: iteration });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= rtol * mid.abs() {
            return Some(Root { x: 0.5 * (lo + hi), iterations: iteration });
        }
    }
    None
}

/// Fixed-point formatting with round-half-even on the exact binary value.
///
/// Negative values that round to zero print without a sign.
pub fn round_half_even(value: f64, decimals: usize) -> String {
    let text = format!("{value:.decimals$}");
    match text.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => text,
    }
}
