//! Synthetic features with closed-form derivatives.
//!
//! Two families are available: Gaussian bumps `w · exp(−‖x−μ‖²/2s²)` and
//! monomials `w · x^e`, both with `w ∈ R^c`. Their jets on a domain are exact
//! restrictions, and [`probe_error`] evaluates residuals anywhere in `R^d`
//! from the same formulas.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{enum_ordered, JetLayout, MultiIndex};
use crate::error::{Error, Result};
use crate::holgrim::Problem;
use crate::jets::{regularity_floor, Domain, JetFunction, SymmetricForm};

/// Highest jet order the generators produce.
pub const MAX_GENERATED_ORDER: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum Feature {
    Gaussian { centre: Vec<f64>, width: f64, weight: Vec<f64> },
    Monomial { exponents: Vec<u32>, weight: Vec<f64> },
}

impl Feature {
    pub fn weight(&self) -> &[f64] {
        match self {
            Feature::Gaussian { weight, .. } | Feature::Monomial { weight, .. } => weight,
        }
    }

    fn dim(&self) -> usize {
        match self {
            Feature::Gaussian { centre, .. } => centre.len(),
            Feature::Monomial { exponents, .. } => exponents.len(),
        }
    }

    /// Scalar derivative `∂^α` of the unweighted feature, with `α` given as
    /// per-axis counts.
    pub fn scalar_derivative(&self, x: &[f64], counts: &[usize]) -> f64 {
        match self {
            Feature::Gaussian { centre, width, .. } => {
                let mut value = 1.0;
                let mut sq = 0.0;
                for ((&xi, &mi), &a) in x.iter().zip(centre).zip(counts) {
                    let y = (xi - mi) / width;
                    sq += y * y;
                    if a > 0 {
                        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
                        value *= sign * hermite(a, y) / width.powi(a as i32);
                    }
                }
                value * (-0.5 * sq).exp()
            }
            Feature::Monomial { exponents, .. } => {
                let mut value = 1.0;
                for ((&xi, &e), &a) in x.iter().zip(exponents).zip(counts) {
                    let e = e as usize;
                    if a > e {
                        return 0.0;
                    }
                    value *= falling(e, a) * xi.powi((e - a) as i32);
                }
                value
            }
        }
    }

    /// `∂_{l₁} … ∂_{l_j} f(x) ∈ R^c` for an ordered basis element.
    pub fn derivative(&self, x: &[f64], basis: &MultiIndex) -> Vec<f64> {
        let counts = axis_counts(basis, x.len());
        let s = self.scalar_derivative(x, &counts);
        self.weight().iter().map(|w| w * s).collect()
    }
}

/// Probabilists' Hermite polynomial `He_n(y)`.
pub fn hermite(n: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, y);
    if n == 0 {
        return prev;
    }
    for m in 1..n {
        let next = y * cur - m as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn falling(e: usize, a: usize) -> f64 {
    (0..a).map(|i| (e - i) as f64).product()
}

fn axis_counts(basis: &MultiIndex, d: usize) -> Vec<usize> {
    let mut counts = vec![0; d];
    for &i in basis.indices() {
        counts[i] += 1;
    }
    counts
}

/// Closed-form description of every feature of a problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Analytic {
    pub gamma: f64,
    pub dim: usize,
    pub outputs: usize,
    pub features: Vec<Feature>,
}

impl Analytic {
    pub fn new(gamma: f64, dim: usize, outputs: usize, features: Vec<Feature>) -> Result<Self> {
        regularity_floor(gamma)?;
        for f in &features {
            if f.dim() != dim || f.weight().len() != outputs {
                return Err(Error::param("analytic feature does not match dimension or outputs"));
            }
            if let Feature::Gaussian { width, .. } = f {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::param("gaussian width must be positive"));
                }
            }
        }
        Ok(Analytic { gamma, dim, outputs, features })
    }

    pub fn max_order(&self) -> usize {
        regularity_floor(self.gamma).expect("validated on construction")
    }

    pub fn jet(&self, i: usize, domain: &Arc<Domain>) -> Result<JetFunction> {
        let f = &self.features[i];
        JetFunction::from_fn(domain.clone(), self.gamma, self.outputs, |p, _, basis| {
            f.derivative(domain.point(p), basis)
        })
    }

    /// Ordered coefficients of the order-`j` form of `Σ cᵢ fᵢ` at `x`.
    pub fn form_at(&self, coefficients: &[(usize, f64)], x: &[f64], j: usize) -> SymmetricForm {
        let basis = enum_ordered(self.dim, j);
        let c = self.outputs;
        let mut coeffs = vec![0.0; basis.len() * c];
        for (r, b) in basis.iter().enumerate() {
            let counts = axis_counts(b, self.dim);
            for &(i, a) in coefficients {
                let f = &self.features[i];
                let s = a * f.scalar_derivative(x, &counts);
                for (coord, w) in f.weight().iter().enumerate() {
                    coeffs[r * c + coord] += s * w;
                }
            }
        }
        SymmetricForm::new(j, self.dim, c, coeffs).expect("shape matches basis")
    }

    /// `Λ^q` of `Σ cᵢ fᵢ` at an arbitrary point.
    pub fn lambda_at(&self, coefficients: &[(usize, f64)], x: &[f64], q: usize) -> f64 {
        (0..=q)
            .map(|j| self.form_at(coefficients, x, j).operator_norm())
            .fold(0.0, f64::max)
    }

    /// Over-bound of `‖fᵢ‖_{Lip(γ)}` on any subset of `region`.
    ///
    /// With `S_j` a bound on the Hilbert–Schmidt norm of the `j`-th derivative
    /// over the region, the bound is
    /// `max(S_{k+1}, max_l (S_l + Σ_{s ≤ k−l} S_{l+s}/s!))`: Taylor's theorem
    /// covers pairs at distance at most one, the triangle inequality the rest.
    /// Gaussian bounds are global; monomial bounds use `region[i] ≥ |x_i|`.
    pub fn lip_bound(&self, i: usize, region: &[f64]) -> f64 {
        let k = self.max_order();
        let sups: Vec<f64> = (0..=k + 1).map(|j| self.derivative_sup(i, j, region)).collect();
        combine_sups(&sups, k)
    }

    fn derivative_sup(&self, i: usize, j: usize, region: &[f64]) -> f64 {
        let f = &self.features[i];
        let w = f.weight().iter().map(|v| v * v).sum::<f64>().sqrt();
        match f {
            Feature::Gaussian { width, .. } => w * gaussian_unit_sup(self.dim, j) / width.powi(j as i32),
            Feature::Monomial { exponents, .. } => {
                let mut total = 0.0;
                for b in enum_ordered(self.dim, j) {
                    let counts = axis_counts(&b, self.dim);
                    let mut v = 1.0;
                    for ((&e, &a), &r) in exponents.iter().zip(&counts).zip(region) {
                        let e = e as usize;
                        v *= if a > e { 0.0 } else { falling(e, a) * r.powi((e - a) as i32) };
                    }
                    total += b.multiplicity() as f64 * v * v;
                }
                w * total.sqrt()
            }
        }
    }

    /// Checks that `problem` stores exactly the restrictions of these
    /// features.
    pub(crate) fn check_against(&self, problem: &Problem) -> Result<()> {
        if self.features.len() != problem.len()
            || self.dim != problem.dim()
            || self.outputs != problem.outputs()
            || self.gamma != problem.gamma()
        {
            return Err(Error::Problem("analytic description does not match the problem".into()));
        }
        let domain = problem.domain();
        let layout: &JetLayout = problem.layout();
        for (i, (f, jet)) in self.features.iter().zip(problem.features()).enumerate() {
            for p in 0..domain.len() {
                let block = jet.point_block(p);
                for j in 0..=layout.max_order() {
                    for (rank, basis) in layout.basis(j).iter().enumerate() {
                        let expect = f.derivative(domain.point(p), basis);
                        for (coord, e) in expect.iter().enumerate() {
                            let got = block[layout.slot(j, rank, coord)];
                            if (got - e).abs() > 1e-10 * (1.0 + e.abs()) {
                                return Err(Error::Problem(format!(
                                    "feature {} disagrees with its analytic form at point {}",
                                    i + 1,
                                    p + 1
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// `max(S_{k+1}, max_l (S_l + Σ_{s=0}^{k−l} S_{l+s}/s!))`.
pub fn combine_sups(sups: &[f64], k: usize) -> f64 {
    let mut best = sups[k + 1];
    for l in 0..=k {
        let mut fact = 1.0;
        let mut v = sups[l];
        for s in 0..=k - l {
            if s > 0 {
                fact *= s as f64;
            }
            v += sups[l + s] / fact;
        }
        best = best.max(v);
    }
    best
}

/// `sup_y ‖D^j exp(−‖y‖²/2)‖_HS` over `R^d`.
///
/// The norm is rotation invariant, so it suffices to scan `y = (ρ, 0, …)`;
/// the scan covers `ρ ∈ [0, 10]` in steps of `1e−4` with a `1.001` margin.
pub fn gaussian_unit_sup(d: usize, j: usize) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&v) = cache.lock().expect("cache lock").get(&(d, j)) {
        return v;
    }
    let v = scan_gaussian_sup(d, j);
    cache.lock().expect("cache lock").insert((d, j), v);
    v
}

fn scan_gaussian_sup(d: usize, j: usize) -> f64 {
    let basis = enum_ordered(d, j);
    let terms: Vec<(f64, usize, f64)> = basis
        .iter()
        .map(|b| {
            let counts = axis_counts(b, d);
            // Factor from the zero coordinates: Π He_{a}(0).
            let rest: f64 = counts[1..].iter().map(|&a| hermite(a, 0.0)).product();
            (b.multiplicity() as f64, counts[0], rest)
        })
        .filter(|t| t.2 != 0.0)
        .collect();
    let mut best = 0.0f64;
    for step in 0..=100_000 {
        let rho = step as f64 * 1e-4;
        let g = (-0.5 * rho * rho).exp();
        let sq: f64 = terms
            .iter()
            .map(|&(m, a, rest)| {
                let v = hermite(a, rho) * rest;
                m * v * v
            })
            .sum();
        best = best.max(g * sq.sqrt());
    }
    best * 1.001
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// Widths drawn uniformly from the range.
    Gaussian { min_width: f64, max_width: f64 },
    /// Exponent vectors with total degree at most `max_degree`.
    Polynomial { max_degree: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    /// Uniform random points in `[0,1]^d`.
    Random { points: usize },
    Explicit(Arc<Domain>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    /// `Aᵢ = lip_norm(fᵢ)` on the domain.
    LipNorm,
    /// Analytic over-bound valid on `[0,1]^d` and the domain.
    Analytic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub features: usize,
    pub domain: DomainSpec,
    pub gamma: f64,
    pub dim: usize,
    pub outputs: usize,
    /// Draw every coefficient from `[0.1, 1]` instead of `±[0.1, 1]`.
    pub positive: bool,
    pub scaling: Scaling,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn gaussian(features: usize, points: usize, dim: usize, gamma: f64, seed: u64) -> Self {
        GeneratorSpec {
            family: Family::Gaussian { min_width: 0.2, max_width: 0.4 },
            features,
            domain: DomainSpec::Random { points },
            gamma,
            dim,
            outputs: 1,
            positive: false,
            scaling: Scaling::LipNorm,
            seed,
        }
    }
}

fn random_domain(rng: &mut ChaCha8Rng, points: usize, dim: usize) -> Result<Domain> {
    let coords: Vec<Vec<f64>> = (0..points)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect();
    Domain::new(coords)
}

fn random_feature(rng: &mut ChaCha8Rng, family: Family, dim: usize, outputs: usize) -> Feature {
    let weight: Vec<f64> = if outputs == 1 {
        vec![1.0]
    } else {
        (0..outputs).map(|_| rng.gen_range(-1.0..1.0)).collect()
    };
    match family {
        Family::Gaussian { min_width, max_width } => Feature::Gaussian {
            centre: (0..dim).map(|_| rng.gen::<f64>()).collect(),
            width: if max_width > min_width { rng.gen_range(min_width..max_width) } else { min_width },
            weight,
        },
        Family::Polynomial { max_degree } => {
            let mut exponents = vec![0u32; dim];
            let degree = rng.gen_range(0..=max_degree);
            for _ in 0..degree {
                exponents[rng.gen_range(0..dim)] += 1;
            }
            Feature::Monomial { exponents, weight }
        }
    }
}

/// Builds a problem from a generator spec. Deterministic under `seed`.
pub fn gen_problem(spec: &GeneratorSpec) -> Result<Problem> {
    let k = regularity_floor(spec.gamma)?;
    if k > MAX_GENERATED_ORDER {
        return Err(Error::Unsupported(format!(
            "generators provide derivatives up to order {MAX_GENERATED_ORDER}, gamma = {} needs {k}",
            spec.gamma
        )));
    }
    if spec.features == 0 || spec.dim == 0 || spec.outputs == 0 {
        return Err(Error::param("features, dimension and outputs must be positive"));
    }
    if let Family::Gaussian { min_width, max_width } = spec.family {
        if !(min_width > 0.0 && max_width >= min_width) {
            return Err(Error::param("gaussian widths need 0 < min <= max"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let domain = Arc::new(match &spec.domain {
        DomainSpec::Random { points } => random_domain(&mut rng, *points, spec.dim)?,
        DomainSpec::Explicit(d) => {
            if d.dim() != spec.dim {
                return Err(Error::incompatible("explicit domain has the wrong dimension"));
            }
            (**d).clone()
        }
    });
    let features: Vec<Feature> = (0..spec.features)
        .map(|_| random_feature(&mut rng, spec.family, spec.dim, spec.outputs))
        .collect();
    let coefficients: Vec<f64> = (0..spec.features)
        .map(|_| {
            let magnitude = rng.gen_range(0.1..=1.0);
            if spec.positive || rng.gen::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    let analytic = Analytic::new(spec.gamma, spec.dim, spec.outputs, features)?;
    let jets = (0..spec.features)
        .map(|i| analytic.jet(i, &domain))
        .collect::<Result<Vec<_>>>()?;

    let problem = match spec.scaling {
        Scaling::LipNorm => {
            let scalings = jets.iter().map(|f| f.lip_norm().max(f64::MIN_POSITIVE)).collect();
            Problem::trusted(jets, coefficients, scalings)?
        }
        Scaling::Analytic => {
            let region = unit_region(&domain);
            let scalings = (0..spec.features).map(|i| analytic.lip_bound(i, &region)).collect();
            Problem::trusted(jets, coefficients, scalings)?
        }
    };
    problem.with_analytic(analytic)
}

/// Per-axis bound on `|x_i|` over `[0,1]^d` and the domain.
fn unit_region(domain: &Domain) -> Vec<f64> {
    let mut region = vec![1.0f64; domain.dim()];
    for p in domain.points() {
        for (r, x) in region.iter_mut().zip(p) {
            *r = r.max(x.abs());
        }
    }
    region
}

/// Largest `Λ^q` of `Σ (aᵢ − uᵢ) fᵢ` over the probes, computed from the
/// closed-form features rather than the stored jets.
pub fn probe_error(problem: &Problem, u: &[(usize, f64)], probes: &[Vec<f64>], q: usize) -> Result<f64> {
    let analytic = problem
        .analytic()
        .ok_or_else(|| Error::Unsupported("probe_error needs a generated problem".into()))?;
    if q > problem.max_order() {
        return Err(Error::OrderRange { order: q, max: problem.max_order() });
    }
    let mut diff: Vec<f64> = problem.coefficients().to_vec();
    for &(i, c) in u {
        if i >= diff.len() {
            return Err(Error::param(format!("feature index {i} out of range")));
        }
        diff[i] -= c;
    }
    let terms: Vec<(usize, f64)> = diff.into_iter().enumerate().filter(|(_, c)| *c != 0.0).collect();
    let mut best = 0.0f64;
    for x in probes {
        if x.len() != problem.dim() {
            return Err(Error::incompatible("probe has the wrong dimension"));
        }
        best = best.max(analytic.lambda_at(&terms, x, q));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> Arc<Domain> {
        Arc::new(Domain::new(points.iter().map(|&x| vec![x]).collect()).unwrap())
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 3.0), 1.0);
        assert_eq!(hermite(1, 3.0), 3.0);
        assert_eq!(hermite(2, 3.0), 8.0);
        assert_eq!(hermite(3, 2.0), 2.0);
    }

    #[test]
    fn square_jet() {
        let a = Analytic::new(2.0, 1, 1, vec![Feature::Monomial { exponents: vec![2], weight: vec![1.0] }]).unwrap();
        let f = a.jet(0, &line(&[0.5, -1.0])).unwrap();
        assert_eq!(f.table(), &[0.25, 1.0, 1.0, -2.0]);
    }

    #[test]
    fn constant_monomial() {
        let a = Analytic::new(3.0, 2, 1, vec![Feature::Monomial { exponents: vec![0, 0], weight: vec![4.0] }]).unwrap();
        let domain = Arc::new(Domain::new(vec![vec![0.1, 0.2], vec![0.3, 0.9]]).unwrap());
        let f = a.jet(0, &domain).unwrap();
        for p in 0..2 {
            let block = f.point_block(p);
            assert_eq!(block[0], 4.0);
            assert!(block[1..].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn gaussian_centre_is_critical() {
        let g = Feature::Gaussian { centre: vec![0.3, 0.6], width: 0.2, weight: vec![1.0] };
        for axis in 0..2 {
            let b = MultiIndex::new(vec![axis], 2).unwrap();
            assert_eq!(g.derivative(&[0.3, 0.6], &b), vec![0.0]);
        }
    }

    #[test]
    fn gaussian_derivatives_match_finite_differences() {
        let g = Feature::Gaussian { centre: vec![0.2, -0.1], width: 0.7, weight: vec![1.0] };
        let x = [0.5, 0.3];
        let h = 1e-5;
        let f = |p: &[f64]| g.scalar_derivative(p, &[0, 0]);
        let fx = |p: &[f64]| g.scalar_derivative(p, &[1, 0]);
        let d0 = (f(&[x[0] + h, x[1]]) - f(&[x[0] - h, x[1]])) / (2.0 * h);
        assert!((d0 - fx(&x)).abs() < 1e-8);
        let d01 = (fx(&[x[0], x[1] + h]) - fx(&[x[0], x[1] - h])) / (2.0 * h);
        assert!((d01 - g.scalar_derivative(&x, &[1, 1])).abs() < 1e-8);
    }

    #[test]
    fn unit_sups_in_one_dimension() {
        // sup |g| = 1, sup |g'| = e^{-1/2}, sup |g''| = 1 (at 0).
        assert!((gaussian_unit_sup(1, 0) / 1.001 - 1.0).abs() < 1e-12);
        assert!((gaussian_unit_sup(1, 1) / 1.001 - (-0.5f64).exp()).abs() < 1e-8);
        assert!((gaussian_unit_sup(1, 2) / 1.001 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_bound_dominates_lip_norm() {
        let mut spec = GeneratorSpec::gaussian(5, 30, 2, 2.0, 4);
        spec.scaling = Scaling::Analytic;
        let p = gen_problem(&spec).unwrap();
        for (f, a) in p.features().iter().zip(p.scalings()) {
            assert!(f.lip_norm() <= *a);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GeneratorSpec::gaussian(6, 12, 2, 1.5, 9);
        let a = gen_problem(&spec).unwrap();
        let b = gen_problem(&spec).unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
        assert_eq!(a.target(), b.target());
        let mut high = spec.clone();
        high.gamma = 3.5;
        assert!(gen_problem(&high).is_err());
    }

    #[test]
    fn probe_error_on_domain_matches_jets() {
        let spec = GeneratorSpec::gaussian(8, 10, 2, 2.0, 2);
        let p = gen_problem(&spec).unwrap();
        let u = vec![(0, 0.3), (3, -1.0)];
        assert_eq!(probe_error(&p, &p.coefficients().iter().copied().enumerate().collect::<Vec<_>>(), &[vec![0.5, 0.5]], 1).unwrap(), 0.0);
        let diff = p.target().sub(&p.assemble(&u).unwrap()).unwrap();
        let probes: Vec<Vec<f64>> = p.domain().points().map(|x| x.to_vec()).collect();
        let jet_max = diff.lambda_profile(1).unwrap().into_iter().fold(0.0, f64::max);
        let analytic_max = probe_error(&p, &u, &probes, 1).unwrap();
        assert!((jet_max - analytic_max).abs() < 1e-10);
    }
}
