//! Timing sweeps over feature count and domain size.
//!
//! Every run uses a fixed number of single-point steps (the accuracy target
//! is unreachable), so rows differ only in problem size. Each row keeps the
//! fastest of several repeats.

use std::fmt::Write as _;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::holgrim::{run, Config, PhaseTimings};
use crate::problems::{gen_problem, GeneratorSpec, Scaling};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    /// Feature counts swept at `fixed_points`.
    pub feature_grid: Vec<usize>,
    pub fixed_points: usize,
    /// Domain sizes swept at `fixed_features`.
    pub point_grid: Vec<usize>,
    pub fixed_features: usize,
    pub steps: usize,
    pub repeats: usize,
    pub dim: usize,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            feature_grid: vec![1000, 2000, 4000],
            fixed_points: 100,
            point_grid: vec![50, 100, 200],
            fixed_features: 1000,
            steps: 10,
            repeats: 3,
            dim: 2,
            gamma: 2.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sweep {
    Features,
    Points,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub sweep: Sweep,
    pub features: usize,
    pub points: usize,
    pub steps: usize,
    pub timings: PhaseTimings,
    /// Reduction time of each step of the fastest repeat.
    pub step_reduction: Vec<Duration>,
}

impl BenchRow {
    pub fn total(&self) -> f64 {
        self.timings.total().as_secs_f64()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// Times one configuration, keeping the repeat with the smallest total.
pub fn bench_case(features: usize, points: usize, config: &BenchConfig, sweep: Sweep) -> Result<BenchRow> {
    let mut spec = GeneratorSpec::gaussian(features, points, config.dim, config.gamma, config.seed);
    spec.scaling = Scaling::Analytic;
    let problem = gen_problem(&spec)?;
    let steps = config.steps.min(Config::max_single_steps(&problem));
    if steps == 0 {
        return Err(Error::Config(format!("{features} features are too few for a single step")));
    }
    let run_config = Config::single_point(1e-300 * problem.norm_budget(), 0.0, 0, steps, config.seed);
    let mut best: Option<BenchRow> = None;
    for _ in 0..config.repeats.max(1) {
        let result = run(&problem, &run_config)?;
        let row = BenchRow {
            sweep,
            features,
            points,
            steps: result.steps_completed(),
            timings: result.timings,
            step_reduction: result.steps.iter().map(|s| s.reduction_time).collect(),
        };
        if best.as_ref().is_none_or(|b| row.total() < b.total()) {
            best = Some(row);
        }
    }
    Ok(best.expect("at least one repeat"))
}

pub fn bench(config: &BenchConfig) -> Result<BenchReport> {
    let mut rows = Vec::new();
    for &n in &config.feature_grid {
        rows.push(bench_case(n, config.fixed_points, config, Sweep::Features)?);
    }
    for &points in &config.point_grid {
        rows.push(bench_case(config.fixed_features, points, config, Sweep::Points)?);
    }
    Ok(BenchReport { rows })
}

impl BenchReport {
    pub fn sweep(&self, sweep: Sweep) -> Vec<&BenchRow> {
        self.rows.iter().filter(|r| r.sweep == sweep).collect()
    }

    /// Plain-text table. `ratio` compares the total with the previous row of
    /// the same sweep; `size` is the ratio of the swept size, which is the
    /// prediction for the phases linear in it.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<8} {:>8} {:>6} {:>5} {:>11} {:>11} {:>11} {:>11} {:>11} {:>7} {:>6}",
            "sweep", "features", "points", "steps", "extension", "matrix", "reduction", "scoring", "total", "ratio", "size"
        )
        .unwrap();
        for sweep in [Sweep::Features, Sweep::Points] {
            let mut prev: Option<&BenchRow> = None;
            for row in self.sweep(sweep) {
                let (ratio, size) = match prev {
                    Some(p) => {
                        let size = match sweep {
                            Sweep::Features => row.features as f64 / p.features as f64,
                            Sweep::Points => row.points as f64 / p.points as f64,
                        };
                        (format!("{:.2}", row.total() / p.total()), format!("{size:.2}"))
                    }
                    None => ("-".into(), "-".into()),
                };
                let t = &row.timings;
                writeln!(
                    out,
                    "{:<8} {:>8} {:>6} {:>5} {:>11.6} {:>11.6} {:>11.6} {:>11.6} {:>11.6} {:>7} {:>6}",
                    match sweep {
                        Sweep::Features => "features",
                        Sweep::Points => "points",
                    },
                    row.features,
                    row.points,
                    row.steps,
                    t.extension.as_secs_f64(),
                    t.matrix.as_secs_f64(),
                    t.reduction.as_secs_f64(),
                    t.scoring.as_secs_f64(),
                    row.total(),
                    ratio,
                    size
                )
                .unwrap();
                prev = Some(row);
            }
        }
        if let Some(last) = self.rows.last() {
            let steps: Vec<String> = last
                .step_reduction
                .iter()
                .map(|d| format!("{:.2e}", d.as_secs_f64()))
                .collect();
            writeln!(out, "reduction per step ({} features, {} points): {}", last.features, last.points, steps.join(" "))
                .unwrap();
        }
        out
    }
}
