#![allow(dead_code)]

use pairstop::simulator::Model;
use pairstop::value_fn::classify_ratio;
use pairstop::{CharacteristicRoots, EulerBranch, Generator, MarketParams, RegionValue, SweepParam, ValidatedParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MIN_LAMBDA: f64 = 0.005;

/// Random accepted parameter sets: symmetric sigma as in the calibration
/// convention, drifts in [-0.3, 0.4], volatilities up to 0.6, discount
/// margin in [0.01, 1], cost rate up to 5%, and a log-ratio volatility
/// `sqrt(2 lambda)` of at least 10% a year.
pub fn random_params(seed: u64, count: usize) -> Vec<(MarketParams, ValidatedParams)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mu1 = rng.random_range(-0.3..0.4);
        let mu2 = rng.random_range(-0.3..0.4);
        let s11 = rng.random_range(0.02..0.6);
        let s22 = rng.random_range(0.02..0.6);
        let s12 = rng.random_range(-0.3..0.3);
        let rho = f64::max(mu1, mu2) + rng.random_range(0.01..1.0);
        let k = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..0.05) };
        let p = MarketParams::symmetric(mu1, mu2, s11, s12, s22, rho, k);
        if let Ok(v) = p.validate() {
            if v.lambda() >= MIN_LAMBDA {
                out.push((p, v));
            }
        }
    }
    out
}

/// Printed thresholds of the published sensitivity tables, in the order of
/// [`SweepParam::ALL`], rows in grid order: `(lower, upper)`.
pub const LONG_FLAT_TABLES: [[(f64, f64); 5]; 7] = [
    [(0.91380, 1.54188), (0.89057, 1.41541), (0.85527, 1.28061), (0.80194, 1.12891), (0.72644, 0.96334)],
    [(0.76457, 0.98771), (0.81341, 1.12128), (0.85527, 1.28061), (0.88736, 1.47155), (0.91037, 1.72474)],
    [(0.92069, 1.21691), (0.89220, 1.24468), (0.85527, 1.28061), (0.81532, 1.32066), (0.77497, 1.36327)],
    [(0.88356, 1.25304), (0.87601, 1.26036), (0.85527, 1.28061), (0.82593, 1.30985), (0.79206, 1.34491)],
    [(0.73242, 1.41132), (0.79189, 1.34509), (0.85527, 1.28061), (0.92029, 1.21730), (0.97527, 1.15901)],
    [(0.84068, 1.36281), (0.84858, 1.31541), (0.85527, 1.28061), (0.86105, 1.25387), (0.86611, 1.23262)],
    [(0.85698, 1.27670), (0.85613, 1.27866), (0.85527, 1.28061), (0.85442, 1.28254), (0.85356, 1.28447)],
];

pub const THREE_REGIME_TABLES: [[(f64, f64); 5]; 7] = [
    [(0.91380, 1.54402), (0.89057, 1.42682), (0.85527, 1.32175), (0.80194, 1.23477), (0.72644, 1.17006)],
    [(0.76457, 1.15468), (0.81341, 1.21883), (0.85527, 1.32175), (0.88736, 1.48176), (0.91037, 1.72581)],
    [(0.92069, 1.22784), (0.89220, 1.26704), (0.85527, 1.32175), (0.81532, 1.38652), (0.77497, 1.45871)],
    [(0.88356, 1.27943), (0.87601, 1.29045), (0.85527, 1.32175), (0.82593, 1.36871), (0.79206, 1.42724)],
    [(0.73242, 1.54345), (0.79189, 1.42754), (0.85527, 1.32175), (0.92029, 1.22837), (0.97527, 1.15911)],
    [(0.84068, 1.40518), (0.84858, 1.35725), (0.85527, 1.32175), (0.86105, 1.29425), (0.86611, 1.27222)],
    [(0.85698, 1.31911), (0.85613, 1.32043), (0.85527, 1.32175), (0.85442, 1.32307), (0.85356, 1.32439)],
];

/// Printed grid values, same order as the tables.
pub const GRIDS: [[f64; 5]; 7] = [
    [-0.00304, 0.04696, 0.09696, 0.14696, 0.19696],
    [0.04347, 0.09347, 0.14347, 0.19347, 0.24347],
    [0.09082, 0.14082, 0.19082, 0.24082, 0.29082],
    [0.03988, 0.08988, 0.13988, 0.18988, 0.23988],
    [-0.05964, -0.00964, 0.04036, 0.09036, 0.14036],
    [0.4, 0.45, 0.5, 0.55, 0.6],
    [0.0, 0.0005, 0.001, 0.0015, 0.002],
];

pub fn published(model: Model, param: SweepParam) -> [(f64, f64); 5] {
    let i = SweepParam::ALL.iter().position(|p| *p == param).unwrap();
    match model {
        Model::LongFlat => LONG_FLAT_TABLES[i],
        Model::LongFlatShort => THREE_REGIME_TABLES[i],
    }
}

/// High-precision values for the reference parameter set, computed with
/// 50-digit arithmetic.
#[allow(clippy::excessive_precision)]
pub mod frozen {
    pub const LAMBDA: f64 = 0.016271221;
    pub const DELTA1: f64 = 4.1337477418774431391;
    pub const DELTA2: f64 = -5.9921687540436475069;
    pub const K1: f64 = 0.85527060333638119265;
    pub const K2: f64 = 1.2806085381543956253;
    pub const C1: f64 = 0.10469612181314208367;
    pub const C2: f64 = 0.055989497679272609223;
    pub const K2_STAR: f64 = 1.3217475860552027389;
    pub const C1_THREE: f64 = 0.10082601392114583536;
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Central-difference first and second derivatives of one branch at `y`
/// with step `1e-6 y`. Each power term's stencil is formed as
/// `c y^d (expm1(d ln1p(t)) +/- expm1(d ln1p(-t)))`, which is the same
/// difference without the cancellation of subtracting rounded values of `w`;
/// the linear part's differences are exact.
pub fn central_differences(branch: &EulerBranch, roots: &CharacteristicRoots, y: f64) -> (f64, f64) {
    let t = 1e-6;
    let h = t * y;
    let (mut first, mut second) = (branch.slope, 0.0);
    for (coef, d) in [(branch.up, roots.delta1), (branch.down, roots.delta2)] {
        if coef == 0.0 {
            continue;
        }
        let base = coef * y.powf(d);
        let up = (d * t.ln_1p()).exp_m1();
        let down = (d * (-t).ln_1p()).exp_m1();
        first += base * (up - down) / (2.0 * h);
        second += base * (up + down) / (h * h);
    }
    (first, second)
}

/// Worst disagreement between analytic and central-difference `(rho - L) w`
/// relative to the size of the generator terms, over grid points whose
/// stencil stays inside one region.
pub fn fd_disagreement(
    grid: &[f64],
    generator: Generator,
    roots: &CharacteristicRoots,
    thresholds: [f64; 2],
    f: &RegionValue,
    value: &dyn Fn(f64) -> f64,
) -> (f64, f64) {
    let mut worst = (0.0, 0.0);
    for &y in grid {
        let h = 1e-6 * y;
        if thresholds.iter().any(|k| (y - k).abs() <= 2.0 * h) {
            continue;
        }
        let region = classify_ratio(y, thresholds[0], thresholds[1]);
        let branch = f.branch(region);
        let exact = branch.eval(roots, y);
        assert_eq!(exact.value, value(y));
        let (first, second) = central_differences(branch, roots, y);
        let analytic = generator.apply(y, exact.value, exact.first, exact.second);
        let numeric = generator.apply(y, exact.value, first, second);
        let scale = generator.scale(y, exact.value, exact.first, exact.second);
        if scale == 0.0 {
            continue;
        }
        let err = (analytic - numeric).abs() / scale;
        if err > worst.0 {
            worst = (err, y);
        }
    }
    worst
}

