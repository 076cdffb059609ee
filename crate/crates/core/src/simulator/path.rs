use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbm::ValidatedParams;

/// Simulation grid and ensemble size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub x1_0: f64,
    pub x2_0: f64,
    /// Step, in years.
    pub dt: f64,
    /// Horizon, in years. Stopping times beyond it are treated as never
    /// happening, which biases values by at most a factor `exp(-rho t_max)`
    /// of the post-horizon flows.
    pub t_max: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::PathConfig(m));
        for (name, v) in [("x1_0", self.x1_0), ("x2_0", self.x2_0), ("dt", self.dt), ("t_max", self.t_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.dt >= self.t_max {
            return bad(format!("dt = {} must be below t_max = {}", self.dt, self.t_max));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be positive".into());
        }
        if self.steps() > u32::MAX as usize {
            return bad(format!("{} steps is too many", self.steps()));
        }
        Ok(())
    }

    /// Number of steps; the simulated horizon is `steps() * dt`.
    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    /// `exp(-rho t_max)`.
    pub fn truncation_bound(&self, rho: f64) -> f64 {
        (-rho * self.t_max).exp()
    }
}

/// Log prices on a uniform time grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PricePath {
    pub dt: f64,
    pub ln_x1: Vec<f64>,
    pub ln_x2: Vec<f64>,
}

impl PricePath {
    pub fn from_prices(dt: f64, x1: &[f64], x2: &[f64]) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::PathConfig(format!("dt must be positive, got {dt}")));
        }
        if x1.len() != x2.len() || x1.is_empty() {
            return Err(Error::PathConfig(format!("price arrays of length {} and {}", x1.len(), x2.len())));
        }
        if let Some(p) = x1.iter().chain(x2).find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::PathConfig(format!("prices must be positive, got {p}")));
        }
        Ok(PricePath { dt, ln_x1: x1.iter().map(|p| p.ln()).collect(), ln_x2: x2.iter().map(|p| p.ln()).collect() })
    }

    pub fn len(&self) -> usize {
        self.ln_x1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_x1.is_empty()
    }

    /// Every `stride`-th point, as a path with step `stride * dt`.
    pub fn view(&self, stride: usize) -> PathView<'_> {
        assert!(stride > 0, "stride must be positive");
        PathView { path: self, stride }
    }

    pub fn x1(&self) -> Vec<f64> {
        self.ln_x1.iter().map(|v| v.exp()).collect()
    }

    pub fn x2(&self) -> Vec<f64> {
        self.ln_x2.iter().map(|v| v.exp()).collect()
    }
}

/// A strided, read-only view of a [`PricePath`].
#[derive(Debug, Clone, Copy)]
pub struct PathView<'a> {
    path: &'a PricePath,
    stride: usize,
}

impl<'a> PathView<'a> {
    pub fn len(&self) -> usize {
        self.path.len().div_ceil(self.stride)
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.path.dt * self.stride as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn ln_x1(&self, k: usize) -> f64 {
        self.path.ln_x1[k * self.stride]
    }

    pub fn ln_x2(&self, k: usize) -> f64 {
        self.path.ln_x2[k * self.stride]
    }

    pub fn ln_ratio(&self, k: usize) -> f64 {
        self.ln_x2(k) - self.ln_x1(k)
    }

    pub fn prices(&self, k: usize) -> (f64, f64) {
        (self.ln_x1(k).exp(), self.ln_x2(k).exp())
    }
}

/// Exact log-normal stepping of the two-asset GBM:
/// `ln X_i += (mu_i - a_ii / 2) dt + (sigma dW)_i`.
///
/// Path `i` draws from the ChaCha8 stream `i` of the configured seed, so a
/// path depends only on `(seed, i)`.
#[derive(Debug, Clone)]
pub struct PathGenerator {
    drift: [f64; 2],
    vol: [[f64; 2]; 2],
    start: [f64; 2],
    steps: usize,
    dt: f64,
    seed: u64,
}

impl PathGenerator {
    pub fn new(v: &ValidatedParams, cfg: &PathConfig) -> Result<Self> {
        cfg.validate()?;
        let p = v.params();
        let d = v.diffusion();
        let root_dt = cfg.dt.sqrt();
        let s = p.sigma;
        Ok(PathGenerator {
            drift: [(p.mu1 - 0.5 * d.a11) * cfg.dt, (p.mu2 - 0.5 * d.a22) * cfg.dt],
            vol: [[s[0][0] * root_dt, s[0][1] * root_dt], [s[1][0] * root_dt, s[1][1] * root_dt]],
            start: [cfg.x1_0.ln(), cfg.x2_0.ln()],
            steps: cfg.steps(),
            dt: cfg.dt,
            seed: cfg.seed,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Overwrites `out` with path `index`.
    pub fn fill(&self, index: u64, out: &mut PricePath) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let n = self.steps + 1;
        out.dt = self.dt;
        out.ln_x1.resize(n, 0.0);
        out.ln_x2.resize(n, 0.0);
        let (mut l1, mut l2) = (self.start[0], self.start[1]);
        out.ln_x1[0] = l1;
        out.ln_x2[0] = l2;
        let [[v11, v12], [v21, v22]] = self.vol;
        for k in 1..n {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            l1 += self.drift[0] + v11 * z1 + v12 * z2;
            l2 += self.drift[1] + v21 * z1 + v22 * z2;
            out.ln_x1[k] = l1;
            out.ln_x2[k] = l2;
        }
    }

    pub fn path(&self, index: u64) -> PricePath {
        let mut out = PricePath { dt: self.dt, ln_x1: Vec::new(), ln_x2: Vec::new() };
        self.fill(index, &mut out);
        out
    }
}

/// The whole ensemble, in path-index order.
pub fn simulate_paths(v: &ValidatedParams, cfg: &PathConfig) -> Result<Vec<PricePath>> {
    let generator = PathGenerator::new(v, cfg)?;
    Ok((0..cfg.n_paths as u64).into_par_iter().map(|i| generator.path(i)).collect())
}
