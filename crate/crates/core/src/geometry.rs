//! Separation thresholds, packings and covers.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jets::Domain;

/// Largest cover size [`grid_cover`] will build.
pub const MAX_COVER_POINTS: usize = 1_000_000;
/// Largest dimension accepted by [`grid_cover`].
pub const MAX_COVER_DIM: usize = 6;
/// Largest point count accepted by [`exact_packing`].
pub const MAX_EXACT_PACKING: usize = 20;

/// Parameters of the point-separation threshold
/// `r = sup{λ > 0 : 2C λ^{γ−q} + ε₀ e^λ ≤ ε/(c d^q)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdQuery {
    pub norm_budget: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon0: f64,
    pub outputs: usize,
    pub dim: usize,
    pub level: usize,
}

impl ThresholdQuery {
    /// `ε / (c d^q)`.
    pub fn rhs(&self) -> f64 {
        self.epsilon / (self.outputs as f64 * (self.dim as f64).powi(self.level as i32))
    }

    /// `2C λ^{γ−q} + ε₀ e^λ`.
    pub fn lhs(&self, lambda: f64) -> f64 {
        2.0 * self.norm_budget * lambda.powf(self.gamma - self.level as f64) + self.epsilon0 * lambda.exp()
    }

    /// `(ε / (2C c d^q))^{1/(γ−q)}`, the threshold when `ε₀ = 0`.
    pub fn closed_form(&self) -> f64 {
        (self.rhs() / (2.0 * self.norm_budget)).powf(1.0 / (self.gamma - self.level as f64))
    }

    fn validate(&self) -> Result<()> {
        if !(self.norm_budget.is_finite() && self.norm_budget > 0.0) {
            return Err(Error::param("C must be positive"));
        }
        if self.outputs == 0 || self.dim == 0 {
            return Err(Error::param("c and d must be positive"));
        }
        if !(self.gamma.is_finite() && self.gamma > self.level as f64) {
            return Err(Error::param(format!("gamma = {} must exceed q = {}", self.gamma, self.level)));
        }
        let rhs = self.rhs();
        if !(self.epsilon0 >= 0.0 && self.epsilon0 < rhs && rhs.is_finite()) {
            return Err(Error::param(format!(
                "need 0 <= epsilon0 < epsilon/(c d^q) = {rhs}, got epsilon0 = {}",
                self.epsilon0
            )));
        }
        Ok(())
    }
}

/// Supremum of `{λ > 0 : g(λ) ≤ rhs}` for an increasing `g` with
/// `g(0) < rhs`: doubling then bisection to relative width `1e−12`. Returns
/// the feasible end of the final bracket.
fn increasing_sup(g: impl Fn(f64) -> f64, rhs: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi) <= rhs {
        lo = hi;
        hi *= 2.0;
        assert!(hi.is_finite(), "threshold map never exceeds its bound");
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The separation radius `r(C, γ, ε, ε₀, q)`.
pub fn solve_r(query: &ThresholdQuery) -> Result<f64> {
    query.validate()?;
    Ok(increasing_sup(|l| query.lhs(l), query.rhs()))
}

/// `min(1, sup{θ > 0 : 2K₀ θ^{γ−l} + ε₀ e^θ ≤ ε})`.
pub fn sandwich_radius(k0: f64, gamma: f64, epsilon: f64, epsilon0: f64, level: usize) -> Result<f64> {
    if !(epsilon0 >= 0.0 && epsilon0 < epsilon && epsilon <= k0 && k0.is_finite()) {
        return Err(Error::param(format!(
            "need 0 <= epsilon0 < epsilon <= K0, got {epsilon0}, {epsilon}, {k0}"
        )));
    }
    if !(gamma > level as f64) {
        return Err(Error::param(format!("gamma = {gamma} must exceed l = {level}")));
    }
    let g = |t: f64| 2.0 * k0 * t.powf(gamma - level as f64) + epsilon0 * t.exp();
    Ok(increasing_sup(g, epsilon).min(1.0))
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::param("radius must be positive"));
    }
    Ok(())
}

/// Points kept in canonical order when farther than `r` from every point
/// already kept; the result is a maximal `r`-separated subset.
pub fn greedy_packing(domain: &Domain, r: f64) -> Result<Vec<usize>> {
    check_radius(r)?;
    let mut kept: Vec<usize> = Vec::new();
    for p in 0..domain.len() {
        if kept.iter().all(|&q| domain.distance(p, q) > r) {
            kept.push(p);
        }
    }
    Ok(kept)
}

/// Size of the largest `r`-separated subset (branch and bound).
pub fn exact_packing(domain: &Domain, r: f64) -> Result<usize> {
    check_radius(r)?;
    let n = domain.len();
    if n > MAX_EXACT_PACKING {
        return Err(Error::SizeGuard(format!(
            "exact packing handles at most {MAX_EXACT_PACKING} points, got {n}"
        )));
    }
    let conflicts: Vec<u32> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && domain.distance(i, j) <= r)
                .fold(0u32, |m, j| m | (1 << j))
        })
        .collect();
    let mut best = greedy_packing(domain, r)?.len();
    branch(&conflicts, (1u32 << n) - 1, 0, &mut best);
    Ok(best)
}

fn branch(conflicts: &[u32], candidates: u32, size: usize, best: &mut usize) {
    if candidates == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + candidates.count_ones() as usize <= *best {
        return;
    }
    let v = candidates.trailing_zeros() as usize;
    let rest = candidates & !(1 << v);
    branch(conflicts, rest & !conflicts[v], size + 1, best);
    branch(conflicts, rest, size, best);
}

/// Uniform grid of cell centres covering `[0,1]^d` by closed `δ`-balls.
///
/// Each axis is split into `ceil(√d / 2δ)` equal cells, so the half-diagonal
/// of a cell is at most `δ`.
pub fn grid_cover(d: usize, delta: f64) -> Result<Domain> {
    if d == 0 || d > MAX_COVER_DIM {
        return Err(Error::SizeGuard(format!("grid covers support 1 <= d <= {MAX_COVER_DIM}, got {d}")));
    }
    check_radius(delta)?;
    let per_axis = grid_count(d, delta);
    let total = (per_axis as f64).powi(d as i32);
    if total > MAX_COVER_POINTS as f64 {
        return Err(Error::SizeGuard(format!(
            "cover would need {per_axis}^{d} points, limit {MAX_COVER_POINTS}"
        )));
    }
    let per_axis = per_axis as usize;
    let total = per_axis.pow(d as u32);
    let mut coords = Vec::with_capacity(total * d);
    for idx in 0..total {
        let mut rem = idx;
        let mut point = vec![0.0; d];
        for axis in (0..d).rev() {
            point[axis] = (rem % per_axis) as f64 / per_axis as f64 + 0.5 / per_axis as f64;
            rem /= per_axis;
        }
        coords.extend(point);
    }
    Domain::from_flat(d, coords)
}

/// Cells per axis used by [`grid_cover`].
pub fn grid_count(d: usize, delta: f64) -> u64 {
    ((d as f64).sqrt() / (2.0 * delta)).ceil().max(1.0) as u64
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // Γ(d/2 + 1) by the recursion Γ(x + 1) = x Γ(x) from Γ(1) or Γ(1/2).
    let (mut x, mut gamma) = if d.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = d as f64 / 2.0 + 1.0;
    while x < target - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    PI.powf(d as f64 / 2.0) / gamma
}

/// `(2^d / ω_d)(1 + 1/ρ)^d`, an upper bound on the `ρ`-packing number of
/// any subset of `[0,1]^d`.
pub fn volumetric_bound(d: usize, rho: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::param("dimension must be positive"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param(format!("rho = {rho} must lie in (0, 1)")));
    }
    Ok(2f64.powi(d as i32) / unit_ball_volume(d) * (1.0 + 1.0 / rho).powi(d as i32))
}
