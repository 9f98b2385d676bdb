//! Carathéodory-type recombination.
//!
//! Given positive weights `α` on `n` features and the values of `Q - 1`
//! linear functionals on each feature, [`reduce`] returns nonnegative weights
//! supported on at most `Q` features that reproduce every functional value
//! and the total weight.
//!
//! Reduction works on the augmented points `x_i = (1, σ_1(h_i), …)`. Groups of
//! more than `2Q` points are first merged block-wise: the weighted barycentres
//! of `2Q` blocks are reduced to `Q` and the surviving blocks are rescaled.
//! The final (at most `2Q`) points are reduced directly by walking along
//! kernel directions of the augmented matrix until the support fits.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functionals::FunctionalSet;
use crate::holgrim::{PhaseTimings, Prepared, Problem};
use crate::jets::JetFunction;
use crate::linalg;

/// Singular values below this fraction of the largest one span the kernel.
pub const KERNEL_TOLERANCE: f64 = 1e-10;

/// Relative floor applied to every residual tolerance.
pub const NUMERICAL_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ReductionInput {
    pub weights: Vec<f64>,
    /// `(Q - 1) x n`, entry `(r, i)` is `σ_r(h_i)`.
    pub moments: DMatrix<f64>,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReductionStatus {
    WithinTolerance,
    /// The reduced weights miss some moment by more than the allowed amount.
    ResidualExceeded { achieved: f64, allowed: f64 },
}

#[derive(Clone, Debug)]
pub struct ReductionOutput {
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    /// `max_r |Σ_support b_i m_ri − Σ_all α_i m_ri|`.
    pub achieved_residual: f64,
    /// `|Σ b − Σ α|`.
    pub weight_sum_error: f64,
    pub status: ReductionStatus,
}

impl ReductionOutput {
    pub fn exceeded(&self) -> bool {
        matches!(self.status, ReductionStatus::ResidualExceeded { .. })
    }

    /// Dense weight vector of length `n`.
    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&i, &w) in self.support.iter().zip(&self.weights) {
            out[i] = w;
        }
        out
    }
}

fn validate(input: &ReductionInput) -> Result<()> {
    let n = input.weights.len();
    if n == 0 {
        return Err(Error::param("recombination needs at least one feature"));
    }
    if input.moments.ncols() != n {
        return Err(Error::incompatible(format!(
            "moment matrix has {} columns for {n} weights",
            input.moments.ncols()
        )));
    }
    if input.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::param("recombination weights must be positive and finite"));
    }
    if input.moments.iter().any(|m| !m.is_finite()) {
        return Err(Error::param("moments must be finite"));
    }
    if !(input.tolerance >= 0.0) {
        return Err(Error::param("tolerance must be nonnegative"));
    }
    Ok(())
}

/// Reduces the support to at most `Q = rows + 1` features.
pub fn reduce(input: &ReductionInput) -> Result<ReductionOutput> {
    validate(input)?;
    let n = input.weights.len();
    let q = input.moments.nrows() + 1;
    let target = moment_vector(&input.moments, &input.weights);
    let total: f64 = input.weights.iter().sum();

    if n <= q {
        return Ok(finish(input, (0..n).collect(), input.weights.clone(), &target, total));
    }

    let augmented = augment(&input.moments);
    let mut weights = input.weights.clone();
    let mut active: Vec<usize> = (0..n).collect();

    while active.len() > 2 * q {
        active = merge_blocks(&augmented, &mut weights, &active, 2 * q);
    }

    let sub = augmented.select_columns(active.iter());
    let mut local: Vec<f64> = active.iter().map(|&i| weights[i]).collect();
    caratheodory(&sub, &mut local);
    let (mut support, mut reduced): (Vec<usize>, Vec<f64>) = active
        .iter()
        .zip(&local)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&i, &w)| (i, w))
        .unzip();

    polish(&augmented, &mut support, &mut reduced, &target, total);
    Ok(finish(input, support, reduced, &target, total))
}

fn moment_vector(moments: &DMatrix<f64>, weights: &[f64]) -> Vec<f64> {
    (0..moments.nrows())
        .map(|r| moments.row(r).iter().zip(weights).map(|(m, w)| m * w).sum())
        .collect()
}

fn augment(moments: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, n) = moments.shape();
    let mut out = DMatrix::zeros(rows + 1, n);
    out.row_mut(0).fill(1.0);
    out.view_mut((1, 0), (rows, n)).copy_from(moments);
    out
}

fn finish(input: &ReductionInput, support: Vec<usize>, weights: Vec<f64>, target: &[f64], total: f64) -> ReductionOutput {
    let mut achieved = 0.0f64;
    for (r, t) in target.iter().enumerate() {
        let got: f64 = support
            .iter()
            .zip(&weights)
            .map(|(&i, w)| w * input.moments[(r, i)])
            .sum();
        achieved = achieved.max((got - t).abs());
    }
    let weight_sum_error = (weights.iter().sum::<f64>() - total).abs();
    let scale = target.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let allowed = input.tolerance.max(NUMERICAL_FLOOR * (1.0 + scale));
    let status = if achieved > allowed {
        ReductionStatus::ResidualExceeded { achieved, allowed }
    } else {
        ReductionStatus::WithinTolerance
    };
    ReductionOutput {
        support,
        weights,
        achieved_residual: achieved,
        weight_sum_error,
        status,
    }
}

/// One divide-and-conquer round: partitions `active` into `blocks`
/// contiguous groups, reduces their barycentres and rescales the members of
/// surviving groups. Returns the new active set.
fn merge_blocks(augmented: &DMatrix<f64>, weights: &mut [f64], active: &[usize], blocks: usize) -> Vec<usize> {
    let rows = augmented.nrows();
    let base = active.len() / blocks;
    let extra = active.len() % blocks;
    let mut groups = Vec::with_capacity(blocks);
    let mut start = 0;
    for g in 0..blocks {
        let len = base + usize::from(g < extra);
        groups.push(&active[start..start + len]);
        start += len;
    }

    let mut bary = DMatrix::zeros(rows, blocks);
    let mut mass = vec![0.0; blocks];
    for (g, members) in groups.iter().enumerate() {
        let w: f64 = members.iter().map(|&i| weights[i]).sum();
        for &i in members.iter() {
            let scale = weights[i] / w;
            for r in 0..rows {
                bary[(r, g)] += scale * augmented[(r, i)];
            }
        }
        mass[g] = w;
    }

    let mut reduced = mass.clone();
    caratheodory(&bary, &mut reduced);

    let mut next = Vec::with_capacity(active.len() / 2 + 1);
    for (g, members) in groups.iter().enumerate() {
        let ratio = reduced[g] / mass[g];
        for &i in members.iter() {
            weights[i] *= ratio;
            if weights[i] > 0.0 {
                next.push(i);
            } else {
                weights[i] = 0.0;
            }
        }
    }
    next
}

/// Moves `weights` along kernel directions of `points` until at most
/// `rank(points)` of them are positive. Zeroed weights stay zero.
fn caratheodory(points: &DMatrix<f64>, weights: &mut [f64]) {
    let (rows, m) = points.shape();
    if m <= rows {
        return;
    }
    let mut kernel = linalg::kernel_basis(points, KERNEL_TOLERANCE);
    let mut alive: Vec<bool> = weights.iter().map(|&w| w > 0.0).collect();

    for idx in 0..kernel.len() {
        let (head, rest) = kernel.split_at_mut(idx + 1);
        let e = &mut head[idx];
        for (v, &a) in e.iter_mut().zip(&alive) {
            if !a {
                *v = 0.0;
            }
        }
        let scale = e.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if scale < 1e-12 {
            continue;
        }
        if !e.iter().any(|&v| v > 0.0) {
            e.iter_mut().for_each(|v| *v = -*v);
        }

        let mut pivot = usize::MAX;
        let mut step = f64::INFINITY;
        for i in 0..m {
            if alive[i] && e[i] > 0.0 {
                let ratio = weights[i] / e[i];
                if ratio < step {
                    step = ratio;
                    pivot = i;
                }
            }
        }
        if pivot == usize::MAX {
            continue;
        }
        for i in 0..m {
            if alive[i] {
                weights[i] -= step * e[i];
                if weights[i] <= 0.0 {
                    weights[i] = 0.0;
                    alive[i] = false;
                }
            }
        }
        weights[pivot] = 0.0;
        alive[pivot] = false;

        let e_pivot = e[pivot];
        for other in rest.iter_mut() {
            let factor = other[pivot] / e_pivot;
            if factor != 0.0 {
                for (o, v) in other.iter_mut().zip(e.iter()) {
                    *o -= factor * v;
                }
            }
            other[pivot] = 0.0;
        }
    }
}

/// Least-squares correction of the reduced weights on their support, kept
/// only when it stays nonnegative and lowers the residual.
fn polish(augmented: &DMatrix<f64>, support: &mut Vec<usize>, weights: &mut Vec<f64>, target: &[f64], total: f64) {
    if support.is_empty() {
        return;
    }
    let sub = augmented.select_columns(support.iter());
    let mut full_target = Vec::with_capacity(target.len() + 1);
    full_target.push(total);
    full_target.extend_from_slice(target);

    let residual_of = |w: &[f64]| -> Vec<f64> {
        let image = &sub * nalgebra::DVector::from_column_slice(w);
        full_target.iter().zip(image.iter()).map(|(t, v)| t - v).collect()
    };
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    for _ in 0..2 {
        let r = residual_of(weights);
        let before = max_abs(&r);
        if before == 0.0 {
            break;
        }
        let Some(delta) = linalg::least_squares(&sub, &r) else { break };
        let candidate: Vec<f64> = weights.iter().zip(&delta).map(|(w, d)| w + d).collect();
        if candidate.iter().any(|&w| w < 0.0) || max_abs(&residual_of(&candidate)) >= before {
            break;
        }
        *weights = candidate;
    }
    let (s, w): (Vec<usize>, Vec<f64>) = support
        .iter()
        .zip(weights.iter())
        .filter(|(_, &w)| w > 0.0)
        .map(|(&i, &w)| (i, w))
        .unzip();
    *support = s;
    *weights = w;
}

/// Result of one recombination step: the best of several shuffled
/// reductions.
#[derive(Clone, Debug)]
pub struct RecombinationStep {
    /// Weights on the normalised features (`u = Σ b_i h_i`).
    pub reduction: ReductionOutput,
    /// `E[u] = max_{σ ∈ Σ*_q} |σ(φ − u)|`.
    pub score: f64,
    /// All candidate scores in shuffle order.
    pub scores: Vec<f64>,
    pub chosen_shuffle: usize,
    pub seeds: Vec<u64>,
    /// Time spent inside `reduce` summed over shuffles.
    pub reduction_time: Duration,
}

/// Seeded permutation of `0..len`.
pub fn shuffle_order(len: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    perm
}

/// Recombination against every functional of order at most `k` at
/// `points`, repeated for `shuffles` permutations of the functional order
/// (seeds `seed, seed + 1, …`); returns the candidate with the smallest
/// `E` score over `Σ*_q`.
pub(crate) fn recombine(
    prep: &Prepared,
    points: &[usize],
    shuffles: usize,
    q: usize,
    epsilon0: f64,
    seed: u64,
    timings: &mut PhaseTimings,
) -> Result<RecombinationStep> {
    if points.is_empty() {
        return Err(Error::param("recombination needs at least one point"));
    }
    if shuffles == 0 {
        return Err(Error::param("shuffle count must be positive"));
    }
    let layout = prep.layout();
    let rows = FunctionalSet::over_points(layout, points, layout.max_order())?;
    let tolerance = epsilon0 / (layout.outputs() as f64 * (layout.dim() as f64).powi(layout.max_order() as i32));

    let mut best: Option<RecombinationStep> = None;
    let mut scores = Vec::with_capacity(shuffles);
    let mut seeds = Vec::with_capacity(shuffles);
    let mut reduction_time = Duration::ZERO;
    for j in 0..shuffles {
        let s = seed.wrapping_add(j as u64);
        let start = Instant::now();
        let order = rows.permuted(&shuffle_order(rows.len(), s));
        let input = ReductionInput {
            weights: prep.alpha().to_vec(),
            moments: prep.moments(order.slots()),
            tolerance,
        };
        timings.matrix += start.elapsed();

        let start = Instant::now();
        let reduction = reduce(&input)?;
        let elapsed = start.elapsed();
        timings.reduction += elapsed;
        reduction_time += elapsed;

        let start = Instant::now();
        let score = prep.score(&reduction.support, &reduction.weights, q);
        timings.scoring += start.elapsed();
        scores.push(score);
        seeds.push(s);
        if best.as_ref().is_none_or(|b| score < b.score) {
            best = Some(RecombinationStep {
                reduction,
                score,
                scores: Vec::new(),
                chosen_shuffle: j,
                seeds: Vec::new(),
                reduction_time: Duration::ZERO,
            });
        }
    }
    let mut best = best.expect("at least one shuffle");
    best.scores = scores;
    best.seeds = seeds;
    best.reduction_time = reduction_time;
    Ok(best)
}

/// Public recombination step on a problem: returns the approximation as a
/// jet on the original features together with the step record.
pub fn recombination_step(
    problem: &Problem,
    points: &[usize],
    shuffles: usize,
    q: usize,
    epsilon0: f64,
    seed: u64,
) -> Result<(JetFunction, RecombinationStep)> {
    if q > problem.max_order() {
        return Err(Error::OrderRange { order: q, max: problem.max_order() });
    }
    let prep = Prepared::new(problem);
    let step = recombine(&prep, points, shuffles, q, epsilon0, seed, &mut PhaseTimings::default())?;
    let coefficients = prep.original_coefficients(&step.reduction.support, &step.reduction.weights);
    let u = problem.assemble(&coefficients)?;
    Ok((u, step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_input(n: usize, rows: usize, seed: u64) -> ReductionInput {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ReductionInput {
            weights: (0..n).map(|_| rng.gen_range(0.1..1.0)).collect(),
            moments: DMatrix::from_fn(rows, n, |_, _| rng.gen_range(-1.0..1.0)),
            tolerance: 0.0,
        }
    }

    fn moments_of(input: &ReductionInput, out: &ReductionOutput) -> Vec<f64> {
        moment_vector(&input.moments, &out.dense(input.weights.len()))
    }

    #[test]
    fn small_input_is_unchanged() {
        let input = random_input(4, 3, 1);
        let out = reduce(&input).unwrap();
        assert_eq!(out.support, vec![0, 1, 2, 3]);
        assert_eq!(out.weights, input.weights);
        assert_eq!(out.achieved_residual, 0.0);
    }

    #[test]
    fn identical_columns_collapse() {
        let input = ReductionInput {
            weights: vec![0.3, 0.7],
            moments: DMatrix::from_row_slice(0, 2, &[]),
            tolerance: 0.0,
        };
        let out = reduce(&input).unwrap();
        assert_eq!(out.support.len(), 1);
        assert!((out.weights[0] - 1.0).abs() < 1e-15);

        let input = ReductionInput {
            weights: vec![0.3, 0.7],
            moments: DMatrix::from_row_slice(1, 2, &[2.5, 2.5]),
            tolerance: 0.0,
        };
        let out = reduce(&input).unwrap();
        assert!(out.support.len() <= 2);
        assert!((out.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_reduction_preserves_moments() {
        let input = random_input(20, 3, 7);
        let out = reduce(&input).unwrap();
        assert!(out.support.len() <= 4);
        let expected = moment_vector(&input.moments, &input.weights);
        for (a, b) in moments_of(&input, &out).iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(out.weights.iter().all(|&w| w >= 0.0));
        assert!(!out.exceeded());
    }

    #[test]
    fn blocked_reduction_on_large_input() {
        let input = random_input(2000, 9, 3);
        let out = reduce(&input).unwrap();
        assert!(out.support.len() <= 10);
        assert!(out.weight_sum_error <= 1e-12 * input.weights.iter().sum::<f64>());
        assert!(out.achieved_residual < 1e-9);
    }

    #[test]
    fn rank_deficient_moments() {
        // rows 2 and 3 duplicate rows 0 and 1
        let base = random_input(30, 2, 11);
        let mut moments = DMatrix::zeros(4, 30);
        for i in 0..30 {
            for r in 0..4 {
                moments[(r, i)] = base.moments[(r % 2, i)];
            }
        }
        let input = ReductionInput { moments, ..base };
        let out = reduce(&input).unwrap();
        assert!(out.support.len() <= 3);
        assert!(out.achieved_residual < 1e-9);
    }

    #[test]
    fn invalid_inputs() {
        let mut input = random_input(5, 2, 1);
        input.weights[2] = 0.0;
        assert!(reduce(&input).is_err());
        let input = ReductionInput { weights: vec![], moments: DMatrix::zeros(1, 0), tolerance: 0.0 };
        assert!(reduce(&input).is_err());
    }

    #[test]
    fn shuffle_is_a_seeded_permutation() {
        let a = shuffle_order(50, 9);
        assert_eq!(a, shuffle_order(50, 9));
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(a, shuffle_order(50, 10));
    }
}
