//! Sparse approximation on the unit cube through a finite cover.
//!
//! The cube is covered by `δ₀`-balls centred on a grid. If `φ − u` has
//! `Λ^k ≤ ε₀` at every centre and both `φ` and `u` have Lip(γ) norm at most
//! `C` on the cube, then `Λ^l(φ − u) ≤ ε` everywhere, where `δ₀` is the
//! sandwich radius for `(C, γ, ε, ε₀, l)`. The run on the cover uses order
//! level `k` and target `ε₀`, and the coefficient-sum identity keeps
//! `‖u‖ ≤ C`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{grid_cover, sandwich_radius};
use crate::holgrim::{run, Config, Problem, RunResult};
use crate::jets::Domain;
use crate::problems::Analytic;

#[derive(Clone, Debug, PartialEq)]
pub struct CompactConfig {
    /// Accuracy `ε` required on the whole cube at level `l`.
    pub epsilon: f64,
    pub level: usize,
    /// Accuracy `ε₀` required at the cover points (defaults to `ε / 2`).
    pub cover_accuracy: Option<f64>,
    /// Cover radius; when absent the pointwise sandwich radius is used.
    /// Supplying it runs the Lip(η) variant, whose constants are not
    /// explicit and must come from the caller.
    pub radius: Option<f64>,
    /// Recombination tolerance for the run (defaults to `ε₀ / (4 c d^k)`).
    pub recombination_epsilon0: Option<f64>,
    pub shuffles: usize,
    pub seed: u64,
}

impl CompactConfig {
    pub fn new(epsilon: f64, level: usize, seed: u64) -> Self {
        CompactConfig {
            epsilon,
            level,
            cover_accuracy: None,
            radius: None,
            recombination_epsilon0: None,
            shuffles: 1,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompactOutcome {
    pub radius: f64,
    pub cover_accuracy: f64,
    pub cover: Arc<Domain>,
    /// `C` computed from Lip norm bounds on the cube.
    pub norm_budget: f64,
    pub problem: Problem,
    pub run: RunResult,
}

/// Lip(γ) norm bounds of every feature on `[0,1]^d`.
pub fn cube_scalings(analytic: &Analytic) -> Vec<f64> {
    let region = vec![1.0; analytic.dim];
    (0..analytic.features.len()).map(|i| analytic.lip_bound(i, &region)).collect()
}

/// `C = Σ |aᵢ| Aᵢ` with the bounds of [`cube_scalings`].
pub fn cube_norm_budget(analytic: &Analytic, coefficients: &[f64]) -> f64 {
    coefficients.iter().zip(cube_scalings(analytic)).map(|(a, s)| a.abs() * s).sum()
}

/// Builds the cover, restricts the features to it and runs the greedy
/// approximation. `coefficients` are the `aᵢ` of `φ = Σ aᵢ fᵢ`.
pub fn compact_pipeline(analytic: &Analytic, coefficients: &[f64], config: &CompactConfig) -> Result<CompactOutcome> {
    let k = analytic.max_order();
    if config.level > k {
        return Err(Error::OrderRange { order: config.level, max: k });
    }
    if coefficients.len() != analytic.features.len() {
        return Err(Error::Problem("one coefficient per feature is required".into()));
    }
    let scalings = cube_scalings(analytic);
    let norm_budget: f64 = coefficients.iter().zip(&scalings).map(|(a, s)| a.abs() * s).sum();

    let cover_accuracy = config.cover_accuracy.unwrap_or(config.epsilon / 2.0);
    let radius = match config.radius {
        Some(r) => r,
        None => sandwich_radius(norm_budget, analytic.gamma, config.epsilon, cover_accuracy, config.level)?,
    };
    let cover = Arc::new(grid_cover(analytic.dim, radius)?);

    let jets = (0..analytic.features.len())
        .map(|i| analytic.jet(i, &cover))
        .collect::<Result<Vec<_>>>()?;
    let problem = Problem::trusted(jets, coefficients.to_vec(), scalings)?.with_analytic(analytic.clone())?;

    let (c, d) = (analytic.outputs as f64, analytic.dim as f64);
    let epsilon0 = config
        .recombination_epsilon0
        .unwrap_or(cover_accuracy / (4.0 * c * d.powi(k as i32)));
    let mut run_config = Config::single_point(cover_accuracy, epsilon0, k, Config::max_single_steps(&problem), config.seed);
    run_config.shuffles = vec![config.shuffles];
    let result = run(&problem, &run_config)?;

    Ok(CompactOutcome {
        radius,
        cover_accuracy,
        cover,
        norm_budget,
        problem,
        run: result,
    })
}
