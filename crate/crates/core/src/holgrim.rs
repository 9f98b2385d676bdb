//! Greedy point selection with recombination.
//!
//! [`run`] approximates `φ = Σ aᵢ fᵢ` on a finite domain by a sparse
//! combination of the same features. Each step adds the points carrying the
//! largest functional residual of `φ − u` and recombines `φ` against every
//! functional of order at most `k` at the selected points.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::combinatorics::{dim_d, JetLayout};
use crate::error::{Error, Result};
use crate::functionals::argmax_abs;
use crate::jets::{linear_combination, Domain, JetFunction};
use crate::problems::Analytic;
use crate::recombination::{recombine, ReductionStatus};

/// Relative slack used when checking `Aᵢ ≥ ‖fᵢ‖`.
pub const SCALING_TOLERANCE: f64 = 1e-9;

/// `φ = Σ aᵢ fᵢ` together with per-feature norm bounds `Aᵢ`.
#[derive(Clone, Debug)]
pub struct Problem {
    domain: Arc<Domain>,
    features: Vec<JetFunction>,
    coefficients: Vec<f64>,
    scalings: Vec<f64>,
    analytic: Option<Arc<Analytic>>,
}

impl Problem {
    /// Validates shapes, nonzero coefficients and `Aᵢ ≥ lip_norm(fᵢ)`.
    pub fn new(features: Vec<JetFunction>, coefficients: Vec<f64>, scalings: Vec<f64>) -> Result<Self> {
        let problem = Self::trusted(features, coefficients, scalings)?;
        for (i, (f, &a)) in problem.features.iter().zip(&problem.scalings).enumerate() {
            let norm = f.lip_norm();
            if norm > a + SCALING_TOLERANCE * a.max(1.0) {
                return Err(Error::Problem(format!(
                    "feature {} has Lip norm {norm:e} above its scaling {a:e}",
                    i + 1
                )));
            }
        }
        Ok(problem)
    }

    /// Like [`Problem::new`] but takes the scalings on trust (used when they
    /// come from an analytic over-bound).
    pub fn trusted(features: Vec<JetFunction>, coefficients: Vec<f64>, scalings: Vec<f64>) -> Result<Self> {
        let first = features.first().ok_or(Error::EmptySet)?;
        if coefficients.len() != features.len() || scalings.len() != features.len() {
            return Err(Error::Problem(format!(
                "{} features, {} coefficients, {} scalings",
                features.len(),
                coefficients.len(),
                scalings.len()
            )));
        }
        if let Some(i) = features.iter().position(|f| !f.is_compatible(first)) {
            return Err(Error::Problem(format!("feature {} does not match feature 1", i + 1)));
        }
        if let Some(i) = coefficients.iter().position(|a| !(a.is_finite() && *a != 0.0)) {
            return Err(Error::Problem(format!("coefficient {} must be finite and nonzero", i + 1)));
        }
        if let Some(i) = scalings.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Problem(format!("scaling {} must be finite and positive", i + 1)));
        }
        Ok(Problem {
            domain: first.domain().clone(),
            features,
            coefficients,
            scalings,
            analytic: None,
        })
    }

    pub fn with_analytic(mut self, analytic: Analytic) -> Result<Self> {
        analytic.check_against(&self)?;
        self.analytic = Some(Arc::new(analytic));
        Ok(self)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn features(&self) -> &[JetFunction] {
        &self.features
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn scalings(&self) -> &[f64] {
        &self.scalings
    }

    pub fn analytic(&self) -> Option<&Analytic> {
        self.analytic.as_deref()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        self.features[0].layout()
    }

    pub fn gamma(&self) -> f64 {
        self.features[0].gamma()
    }

    pub fn max_order(&self) -> usize {
        self.layout().max_order()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn outputs(&self) -> usize {
        self.layout().outputs()
    }

    /// `C = Σ |aᵢ| Aᵢ`.
    pub fn norm_budget(&self) -> f64 {
        self.coefficients.iter().zip(&self.scalings).map(|(a, s)| a.abs() * s).sum()
    }

    /// `φ = Σ aᵢ fᵢ`.
    pub fn target(&self) -> JetFunction {
        let terms: Vec<(f64, &JetFunction)> = self.coefficients.iter().copied().zip(&self.features).collect();
        linear_combination(&terms).expect("features validated as compatible")
    }

    /// `Σ cᵢ fᵢ` for sparse `(index, coefficient)` pairs; empty gives zero.
    pub fn assemble(&self, coefficients: &[(usize, f64)]) -> Result<JetFunction> {
        if let Some(&(i, _)) = coefficients.iter().find(|(i, _)| *i >= self.len()) {
            return Err(Error::param(format!("feature index {i} out of range")));
        }
        if coefficients.is_empty() {
            return JetFunction::with_layout(
                self.domain.clone(),
                self.layout().clone(),
                self.gamma(),
                vec![0.0; self.features[0].table().len()],
            );
        }
        let terms: Vec<(f64, &JetFunction)> = coefficients.iter().map(|&(i, c)| (c, &self.features[i])).collect();
        linear_combination(&terms)
    }
}

/// Positive weights and unit-scaled features: `αᵢ = |aᵢ| Aᵢ`,
/// `hᵢ = sign(aᵢ) fᵢ / Aᵢ`.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub alpha: Vec<f64>,
    pub features: Vec<JetFunction>,
    pub signs: Vec<f64>,
}

pub fn normalize(problem: &Problem) -> Normalized {
    let mut alpha = Vec::with_capacity(problem.len());
    let mut features = Vec::with_capacity(problem.len());
    let mut signs = Vec::with_capacity(problem.len());
    for ((f, &a), &s) in problem.features.iter().zip(&problem.coefficients).zip(&problem.scalings) {
        let sign = a.signum();
        alpha.push(a.abs() * s);
        signs.push(sign);
        features.push(linear_combination(&[(sign / s, f)]).expect("single term"));
    }
    Normalized { alpha, features, signs }
}

/// Cached normalised tables shared by every step of a run.
#[derive(Debug)]
pub(crate) struct Prepared {
    layout: Arc<JetLayout>,
    points: usize,
    alpha: Vec<f64>,
    signs: Vec<f64>,
    scalings: Vec<f64>,
    /// Normalised feature tables, one per feature.
    h: Vec<Vec<f64>>,
    phi: Vec<f64>,
}

impl Prepared {
    pub(crate) fn new(problem: &Problem) -> Self {
        let normalized = normalize(problem);
        Prepared {
            layout: problem.layout().clone(),
            points: problem.domain.len(),
            alpha: normalized.alpha,
            signs: normalized.signs,
            scalings: problem.scalings.clone(),
            h: normalized.features.into_iter().map(|f| f.table().to_vec()).collect(),
            phi: problem.target().table().to_vec(),
        }
    }

    pub(crate) fn layout(&self) -> &JetLayout {
        &self.layout
    }

    pub(crate) fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Rows `σ_r(hᵢ)` for the given table slots.
    pub(crate) fn moments(&self, slots: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(slots.len(), self.h.len(), |r, i| self.h[i][slots[r]])
    }

    /// Table of `φ − Σ b hᵢ`.
    pub(crate) fn residual(&self, support: &[usize], weights: &[f64]) -> Vec<f64> {
        let mut r = self.phi.clone();
        for (&i, &b) in support.iter().zip(weights) {
            for (x, v) in r.iter_mut().zip(&self.h[i]) {
                *x -= b * v;
            }
        }
        r
    }

    /// `max_{σ ∈ Σ*_q} |σ(φ − u)|` for `u = Σ b hᵢ`.
    pub(crate) fn score(&self, support: &[usize], weights: &[f64], q: usize) -> f64 {
        let block = self.layout.point_block();
        let width = self.layout.slots_upto(q);
        let mut best = 0.0f64;
        for p in 0..self.points {
            for slot in p * block..p * block + width {
                let mut v = self.phi[slot];
                for (&i, &b) in support.iter().zip(weights) {
                    v -= b * self.h[i][slot];
                }
                best = best.max(v.abs());
            }
        }
        best
    }

    /// `c_s = sign(a_e) b_s / A_e` on the original features.
    pub(crate) fn original_coefficients(&self, support: &[usize], weights: &[f64]) -> Vec<(usize, f64)> {
        support
            .iter()
            .zip(weights)
            .map(|(&i, &b)| (i, self.signs[i] * b / self.scalings[i]))
            .collect()
    }
}

/// Largest `|σ(r)|` over `Τ_{p,q}` at every point, from a residual table.
fn point_peaks(layout: &JetLayout, residual: &[f64], q: usize) -> Vec<f64> {
    let block = layout.point_block();
    let width = layout.slots_upto(q);
    residual
        .chunks(block)
        .map(|b| b[..width].iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect()
}

fn extend_from_residual(layout: &JetLayout, residual: &[f64], previous: &[usize], m: usize, q: usize) -> Result<Vec<usize>> {
    let points = residual.len() / layout.point_block();
    if previous.len() + m > points {
        return Err(Error::Budget { requested: previous.len() + m, available: points });
    }
    let mut peaks = point_peaks(layout, residual, q);
    let mut out = previous.to_vec();
    for &p in previous {
        peaks[p] = f64::NEG_INFINITY;
    }
    for _ in 0..m {
        // Ties go to the lowest point index, which carries the first
        // functional in canonical order.
        let (p, _) = peaks
            .iter()
            .enumerate()
            .fold((usize::MAX, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        out.push(p);
        peaks[p] = f64::NEG_INFINITY;
    }
    Ok(out)
}

/// Extends `previous` by `m` points, each time taking the carrier of the
/// functional in `Σ*_q` with the largest `|σ(φ − u)|` among points not yet
/// selected.
pub fn extension_step(phi: &JetFunction, u: &JetFunction, previous: &[usize], m: usize, q: usize) -> Result<Vec<usize>> {
    if !phi.is_compatible(u) {
        return Err(Error::incompatible("target and approximation differ in domain or regularity"));
    }
    if q > phi.max_order() {
        return Err(Error::OrderRange { order: q, max: phi.max_order() });
    }
    if let Some(&p) = previous.iter().find(|&&p| p >= phi.domain().len()) {
        return Err(Error::param(format!("point index {p} out of range")));
    }
    let residual: Vec<f64> = phi.table().iter().zip(u.table()).map(|(a, b)| a - b).collect();
    extend_from_residual(phi.layout(), &residual, previous, m, q)
}

/// Run parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub epsilon: f64,
    pub epsilon0: f64,
    pub order_level: usize,
    pub max_steps: usize,
    /// Shuffle count per step; a single entry applies to every step.
    pub shuffles: Vec<usize>,
    /// New points per step; a single entry applies to every step.
    pub budgets: Vec<usize>,
    pub seed: u64,
}

impl Config {
    /// One point and one shuffle per step.
    pub fn single_point(epsilon: f64, epsilon0: f64, order_level: usize, max_steps: usize, seed: u64) -> Self {
        Config {
            epsilon,
            epsilon0,
            order_level,
            max_steps,
            shuffles: vec![1],
            budgets: vec![1],
            seed,
        }
    }

    /// The largest step count allowed for one point per step:
    /// `min((n − 1) / (c D(d,k)), Λ)`.
    pub fn max_single_steps(problem: &Problem) -> usize {
        let per_point = problem.layout().slots_upto(problem.max_order());
        ((problem.len() - 1) / per_point).min(problem.domain.len())
    }

    fn per_step(values: &[usize], t: usize) -> usize {
        if values.len() == 1 {
            values[0]
        } else {
            values[t - 1]
        }
    }

    pub fn shuffles_at(&self, t: usize) -> usize {
        Self::per_step(&self.shuffles, t)
    }

    pub fn budget_at(&self, t: usize) -> usize {
        Self::per_step(&self.budgets, t)
    }

    /// `κ = k₁ + … + k_M`.
    pub fn kappa(&self) -> usize {
        (1..=self.max_steps).map(|t| self.budget_at(t)).sum()
    }

    /// `ε / (c d^q)`, the per-functional termination threshold.
    pub fn functional_threshold(&self, c: usize, d: usize) -> f64 {
        self.epsilon / (c as f64 * (d as f64).powi(self.order_level as i32))
    }

    pub fn validate(&self, problem: &Problem) -> Result<()> {
        let (c, d, k) = (problem.outputs(), problem.dim(), problem.max_order());
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.order_level > k {
            return Err(Error::Config(format!("order level {} exceeds k = {k}", self.order_level)));
        }
        let threshold = self.functional_threshold(c, d);
        if !(self.epsilon0 >= 0.0 && self.epsilon0 < threshold) {
            return Err(Error::Config(format!(
                "epsilon0 = {} must satisfy 0 <= epsilon0 < epsilon/(c d^q) = {threshold}",
                self.epsilon0
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max steps must be positive".into()));
        }
        for (name, values) in [("shuffles", &self.shuffles), ("budgets", &self.budgets)] {
            if values.len() != 1 && values.len() != self.max_steps {
                return Err(Error::Config(format!(
                    "{name} needs 1 or {} entries, got {}",
                    self.max_steps,
                    values.len()
                )));
            }
            if values.contains(&0) {
                return Err(Error::Config(format!("{name} entries must be positive")));
            }
        }
        let kappa = self.kappa();
        let per_point = c * dim_d(d, k)?;
        let n = problem.len();
        let lambda = problem.domain.len();
        if kappa * per_point > n - 1 || kappa > lambda {
            return Err(Error::Config(format!(
                "kappa = {kappa} violates kappa <= min((n-1)/(c D(d,k)), Lambda) = min({}/{per_point}, {lambda})",
                n - 1
            )));
        }
        Ok(())
    }
}

/// Wall-clock time spent in each phase of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub extension: Duration,
    pub matrix: Duration,
    pub reduction: Duration,
    pub scoring: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.extension + self.matrix + self.reduction + self.scoring
    }
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub step: usize,
    pub new_points: Vec<usize>,
    /// Coefficients on original features, signs and scalings restored.
    pub coefficients: Vec<(usize, f64)>,
    /// Weights on the normalised features.
    pub weights: Vec<(usize, f64)>,
    pub score: f64,
    pub chosen_shuffle: usize,
    pub seeds: Vec<u64>,
    pub reduction_residual: f64,
    pub status: ReductionStatus,
    pub reduction_time: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The criterion held before step `at_step` and the run stopped there.
    Criterion { at_step: usize },
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub config: Config,
    pub steps: Vec<StepRecord>,
    pub termination: Termination,
    pub selected_points: Vec<usize>,
    /// Final support `e(s)` and coefficients `c_s`.
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// `Σ |c_s| A_{e(s)}`.
    pub coefficient_sum: f64,
    pub norm_budget: f64,
    /// `max_{σ ∈ Σ*_q} |σ(φ − u)|` for the returned approximation.
    pub final_functional_max: f64,
    /// `max_z Λ^q(φ − u)(z)`.
    pub final_lambda_max: f64,
    pub criterion_met: bool,
    pub min_separation: f64,
    pub timings: PhaseTimings,
}

impl RunResult {
    pub fn steps_completed(&self) -> usize {
        self.steps.len()
    }

    pub fn final_pairs(&self) -> Vec<(usize, f64)> {
        self.support.iter().copied().zip(self.coefficients.iter().copied()).collect()
    }

    /// Residual-exceeded reports collected across steps.
    pub fn exceeded_steps(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter(|s| matches!(s.status, ReductionStatus::ResidualExceeded { .. }))
            .map(|s| s.step)
            .collect()
    }
}

/// Smallest pairwise distance among `points` (infinite for fewer than two).
pub fn min_separation(domain: &Domain, points: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for (a, &p) in points.iter().enumerate() {
        for &q in &points[a + 1..] {
            best = best.min(domain.distance(p, q));
        }
    }
    best
}

/// `min{2C, 2C max_{h ≤ q} dist^{γ−h} + ε₀ e^{dist}}`, the pointwise bound
/// on `Λ^q(φ − u)` at distance `dist` from the selected points.
pub fn intermediate_bound(norm_budget: f64, gamma: f64, q: usize, epsilon0: f64, dist: f64) -> f64 {
    let power = (0..=q).map(|h| dist.powf(gamma - h as f64)).fold(0.0, f64::max);
    (2.0 * norm_budget).min(2.0 * norm_budget * power + epsilon0 * dist.exp())
}

pub fn run(problem: &Problem, config: &Config) -> Result<RunResult> {
    config.validate(problem)?;
    let (c, d, q) = (problem.outputs(), problem.dim(), config.order_level);
    let threshold = config.functional_threshold(c, d);
    let mut timings = PhaseTimings::default();

    let start = Instant::now();
    let prep = Prepared::new(problem);
    timings.matrix += start.elapsed();

    let mut selected: Vec<usize> = Vec::new();
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut residual = prep.phi.clone();
    let mut support: Vec<usize> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut termination = Termination::MaxSteps;

    for t in 1..=config.max_steps {
        if t >= 2 {
            let start = Instant::now();
            let peak = point_peaks(prep.layout(), &residual, q).into_iter().fold(0.0, f64::max);
            timings.scoring += start.elapsed();
            if peak <= threshold {
                termination = Termination::Criterion { at_step: t };
                break;
            }
        }

        let start = Instant::now();
        selected = extend_from_residual(prep.layout(), &residual, &selected, config.budget_at(t), q)?;
        timings.extension += start.elapsed();

        let seed = config.seed.wrapping_add(t as u64);
        let step = recombine(&prep, &selected, config.shuffles_at(t), q, config.epsilon0, seed, &mut timings)?;
        support = step.reduction.support.clone();
        weights = step.reduction.weights.clone();

        let start = Instant::now();
        residual = prep.residual(&support, &weights);
        timings.scoring += start.elapsed();

        steps.push(StepRecord {
            step: t,
            new_points: selected[selected.len() - config.budget_at(t)..].to_vec(),
            coefficients: prep.original_coefficients(&support, &weights),
            weights: support.iter().copied().zip(weights.iter().copied()).collect(),
            score: step.score,
            chosen_shuffle: step.chosen_shuffle,
            seeds: step.seeds,
            reduction_residual: step.reduction.achieved_residual,
            status: step.reduction.status,
            reduction_time: step.reduction_time,
        });
    }

    let start = Instant::now();
    let coefficients_pairs = prep.original_coefficients(&support, &weights);
    let u = problem.assemble(&coefficients_pairs)?;
    let diff = problem.target().sub(&u)?;
    let final_functional_max = argmax_abs(
        diff.table()
            .chunks(prep.layout().point_block())
            .flat_map(|b| b[..prep.layout().slots_upto(q)].iter().copied()),
    )
    .1;
    let final_lambda_max = diff.lambda_profile(q)?.into_iter().fold(0.0, f64::max);
    timings.scoring += start.elapsed();

    let coefficient_sum = coefficients_pairs
        .iter()
        .map(|&(i, cs)| cs.abs() * problem.scalings[i])
        .sum();
    Ok(RunResult {
        config: config.clone(),
        termination,
        min_separation: min_separation(&problem.domain, &selected),
        selected_points: selected,
        support,
        coefficients: coefficients_pairs.iter().map(|&(_, cs)| cs).collect(),
        coefficient_sum,
        norm_budget: problem.norm_budget(),
        final_functional_max,
        final_lambda_max,
        criterion_met: final_functional_max <= threshold,
        steps,
        timings,
    })
}
