use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gbm::ValidatedParams;
use crate::numeric::mean_and_variance;
use crate::position::Position;

use super::ledger::Action;
use super::path::{PathConfig, PathGenerator, PricePath};
use super::rule::{schedule, Passage, ThresholdRule};

/// Monte Carlo estimate of an expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::PathConfig(format!("need at least 2 samples, got {}", samples.len())));
        }
        let (mean, var) = mean_and_variance(samples);
        Ok(McEstimate { mean, stderr: (var / samples.len() as f64).sqrt(), n: samples.len() })
    }

    /// Estimate of `E[a - b]` from per-path pairs drawn with common random
    /// numbers.
    pub fn paired_difference(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::PathConfig(format!("paired samples of length {} and {}", a.len(), b.len())));
        }
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        McEstimate::from_samples(&d)
    }
}

/// One policy evaluation inside a batch: `rule` from `start`, observed
/// every `stride` simulation steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McTask {
    pub rule: ThresholdRule,
    pub start: Position,
    pub stride: usize,
}

impl McTask {
    pub fn new(rule: ThresholdRule, start: Position) -> Self {
        McTask { rule, start, stride: 1 }
    }

    pub fn with_stride(self, stride: usize) -> Self {
        McTask { stride, ..self }
    }
}

const BLOCK: usize = 64;

/// Log ratio on a strided grid with per-block extremes, so first-passage
/// searches skip blocks that cannot contain a hit.
struct IndexedRatio {
    values: Vec<f64>,
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl IndexedRatio {
    fn new() -> Self {
        IndexedRatio { values: Vec::new(), mins: Vec::new(), maxs: Vec::new() }
    }

    fn rebuild(&mut self, path: &PricePath, stride: usize) {
        self.values.clear();
        self.values.extend(
            path.ln_x1.iter().zip(&path.ln_x2).step_by(stride).map(|(l1, l2)| l2 - l1),
        );
        self.mins.clear();
        self.maxs.clear();
        for chunk in self.values.chunks(BLOCK) {
            self.mins.push(chunk.iter().copied().fold(f64::INFINITY, f64::min));
            self.maxs.push(chunk.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
    }

    fn search(&self, from: usize, hit: impl Fn(f64) -> bool, block_may_hit: impl Fn(usize) -> bool) -> Option<usize> {
        let n = self.values.len();
        if from >= n {
            return None;
        }
        let first_block = from / BLOCK;
        let end = ((first_block + 1) * BLOCK).min(n);
        if let Some(k) = (from..end).find(|&k| hit(self.values[k])) {
            return Some(k);
        }
        let b = (first_block + 1..self.mins.len()).find(|&b| block_may_hit(b))?;
        let start = b * BLOCK;
        (start..(start + BLOCK).min(n)).find(|&k| hit(self.values[k]))
    }
}

impl Passage for IndexedRatio {
    fn first_at_or_below(&self, from: usize, level: f64) -> Option<usize> {
        self.search(from, |v| v <= level, |b| self.mins[b] <= level)
    }

    fn first_at_or_above(&self, from: usize, level: f64) -> Option<usize> {
        self.search(from, |v| v >= level, |b| self.maxs[b] >= level)
    }
}

struct Workspace {
    path: PricePath,
    ratios: Vec<(usize, IndexedRatio)>,
}

fn path_totals(
    generator: &PathGenerator,
    tasks: &[McTask],
    rho: f64,
    origin: (f64, f64),
    index: u64,
    ws: &mut Workspace,
) -> Result<Vec<f64>> {
    generator.fill(index, &mut ws.path);
    for (stride, ratio) in ws.ratios.iter_mut() {
        ratio.rebuild(&ws.path, *stride);
    }
    let mut totals = Vec::with_capacity(tasks.len());
    for task in tasks {
        let ratio = &ws.ratios.iter().find(|(s, _)| *s == task.stride).expect("stride indexed").1;
        let plan = schedule(ratio, &task.rule, task.start)?;
        let dt = ws.path.dt * task.stride as f64;
        let mut total = 0.0;
        for &(k, action) in plan.trades.iter().flatten() {
            let j = k * task.stride;
            // Trades at t = 0 use the configured prices, not exp(ln x).
            let (x1, x2) = if j == 0 { origin } else { (ws.path.ln_x1[j].exp(), ws.path.ln_x2[j].exp()) };
            total += Action::discounted_flow(action, k as f64 * dt, x1, x2, rho, &task.rule.costs);
        }
        totals.push(total);
    }
    Ok(totals)
}

/// Per-path discounted totals of every task, `result[task][path]`.
///
/// All tasks see the same simulated paths (common random numbers). Path `i`
/// depends only on the seed and `i`, and results are gathered in path
/// order, so the output does not depend on the thread count.
pub fn mc_samples(v: &ValidatedParams, cfg: &PathConfig, tasks: &[McTask]) -> Result<Vec<Vec<f64>>> {
    let generator = PathGenerator::new(v, cfg)?;
    let rho = v.params().rho;
    let mut strides: Vec<usize> = tasks.iter().map(|t| t.stride).collect();
    strides.sort_unstable();
    strides.dedup();
    if strides.first() == Some(&0) {
        return Err(Error::PathConfig("stride must be positive".into()));
    }
    for t in tasks {
        if !t.rule.supports(t.start) {
            return Err(Error::UnsupportedPosition(t.start.as_i8()));
        }
    }
    let new_workspace = || Workspace {
        path: PricePath { dt: cfg.dt, ln_x1: Vec::new(), ln_x2: Vec::new() },
        ratios: strides.iter().map(|&s| (s, IndexedRatio::new())).collect(),
    };
    let per_path: Vec<Vec<f64>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map_init(new_workspace, |ws, i| path_totals(&generator, tasks, rho, (cfg.x1_0, cfg.x2_0), i, ws))
        .collect::<Result<_>>()?;

    let mut by_task = vec![Vec::with_capacity(cfg.n_paths); tasks.len()];
    for row in per_path {
        for (column, value) in by_task.iter_mut().zip(row) {
            column.push(value);
        }
    }
    Ok(by_task)
}

/// Monte Carlo estimate of the value of following `rule` from `start`.
pub fn mc_value(v: &ValidatedParams, cfg: &PathConfig, rule: &ThresholdRule, start: Position) -> Result<McEstimate> {
    let samples = mc_samples(v, cfg, &[McTask::new(*rule, start)])?;
    McEstimate::from_samples(&samples[0])
}
