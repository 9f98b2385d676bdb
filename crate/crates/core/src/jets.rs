//! Lip(γ) jets on a finite point cloud.
//!
//! A jet `ψ = (ψ⁰, …, ψᵏ)` stores, at every point of the domain and for every
//! order `j <= k`, a symmetric `j`-linear form `R^d -> R^c`. Only the values on
//! ordered basis elements are kept; see [`JetLayout`] for the slot order.
//!
//! Tensor powers of `R^d` carry the inner-product (Hilbert–Schmidt) norm, so
//! the operator norm of a form is the spectral norm of its `c x d^j`
//! coefficient matrix.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::combinatorics::{JetLayout, MultiIndex};
use crate::error::{Error, Result};
use crate::linalg;

/// A finite set of distinct points in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    dim: usize,
    coords: Vec<f64>,
}

impl Domain {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::param("points have mixed dimensions"));
        }
        Self::from_flat(dim, points.into_iter().flatten().collect())
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("domain dimension must be positive"));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::param("domain needs at least one complete point"));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("domain coordinates must be finite"));
        }
        let domain = Domain { dim, coords };
        let mut order: Vec<usize> = (0..domain.len()).collect();
        order.sort_by(|&a, &b| cmp_points(domain.point(a), domain.point(b)));
        for w in order.windows(2) {
            if domain.point(w[0]) == domain.point(w[1]) {
                return Err(Error::param(format!("points {} and {} coincide", w[0], w[1])));
            }
        }
        Ok(domain)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.point(i), self.point(j))
    }

    /// Distance from `x` to the nearest of the listed points.
    pub fn distance_to_set(&self, x: &[f64], set: &[usize]) -> f64 {
        set.iter()
            .map(|&s| distance(x, self.point(s)))
            .fold(f64::INFINITY, f64::min)
    }
}

fn cmp_points(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The integer `k` with `gamma ∈ (k, k+1]`.
pub fn regularity_floor(gamma: f64) -> Result<usize> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::param(format!("regularity {gamma} must be positive")));
    }
    Ok(gamma.ceil() as usize - 1)
}

/// A symmetric `j`-linear form `R^d -> R^c`, stored on ordered basis
/// elements as `coeffs[rank * c + coord]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricForm {
    order: usize,
    dim: usize,
    outputs: usize,
    coeffs: Vec<f64>,
}

impl SymmetricForm {
    pub fn new(order: usize, dim: usize, outputs: usize, coeffs: Vec<f64>) -> Result<Self> {
        let count = crate::combinatorics::beta(dim, order)?;
        if coeffs.len() != count * outputs {
            return Err(Error::param(format!(
                "order-{order} form over R^{dim} -> R^{outputs} needs {} coefficients, got {}",
                count * outputs,
                coeffs.len()
            )));
        }
        Ok(SymmetricForm { order, dim, outputs, coeffs })
    }

    pub fn zeros(order: usize, dim: usize, outputs: usize) -> Result<Self> {
        let count = crate::combinatorics::beta(dim, order)?;
        Self::new(order, dim, outputs, vec![0.0; count * outputs])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Value on the ordered basis element with the given rank.
    pub fn value(&self, rank: usize) -> &[f64] {
        &self.coeffs[rank * self.outputs..(rank + 1) * self.outputs]
    }

    /// Exact operator norm.
    pub fn operator_norm(&self) -> f64 {
        if self.order == 0 {
            return linalg::euclidean(&self.coeffs);
        }
        let mult: Vec<usize> = crate::combinatorics::enum_ordered(self.dim, self.order)
            .iter()
            .map(MultiIndex::multiplicity)
            .collect();
        weighted_spectral_norm(&self.coeffs, &mult, self.outputs)
    }

    /// The `c x d^j` matrix with every ordered coefficient replicated at all
    /// permutations of its index tuple (row-major).
    pub fn expanded(&self) -> Vec<f64> {
        let d = self.dim;
        let cols = d.pow(self.order as u32);
        let mut out = vec![0.0; self.outputs * cols];
        let mut digits = vec![0usize; self.order];
        for col in 0..cols {
            let mut rest = col;
            for slot in digits.iter_mut().rev() {
                *slot = rest % d;
                rest /= d;
            }
            let rank = MultiIndex::from_unsorted(digits.clone()).rank(d);
            for s in 0..self.outputs {
                out[s * cols + col] = self.coeffs[rank * self.outputs + s];
            }
        }
        out
    }
}

/// Free-function form of [`SymmetricForm::operator_norm`].
pub fn operator_norm(form: &SymmetricForm) -> f64 {
    form.operator_norm()
}

/// Spectral norm of the expanded `c x d^j` matrix, computed from the ordered
/// coefficients: scaling column `rank` by `sqrt(multiplicity)` preserves
/// `M Mᵀ`, hence the singular values.
fn weighted_spectral_norm(coeffs: &[f64], mult: &[usize], outputs: usize) -> f64 {
    if outputs == 1 {
        let scaled: Vec<f64> = coeffs.iter().zip(mult).map(|(x, &m)| (m as f64).sqrt() * x).collect();
        return linalg::euclidean(&scaled);
    }
    let cols = mult.len();
    let mut data = vec![0.0; outputs * cols];
    for (rank, &m) in mult.iter().enumerate() {
        let w = (m as f64).sqrt();
        for s in 0..outputs {
            data[s * cols + rank] = w * coeffs[rank * outputs + s];
        }
    }
    linalg::spectral_norm(outputs, cols, &data)
}

/// A Lip(γ) jet on a finite domain.
#[derive(Clone, Debug)]
pub struct JetFunction {
    domain: Arc<Domain>,
    layout: Arc<JetLayout>,
    gamma: f64,
    table: Vec<f64>,
}

impl PartialEq for JetFunction {
    fn eq(&self, other: &Self) -> bool {
        self.gamma == other.gamma
            && *self.layout == *other.layout
            && (Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain)
            && self.table == other.table
    }
}

impl JetFunction {
    /// Wraps a complete table laid out as
    /// `table[point * layout.point_block() + slot]`.
    pub fn new(domain: Arc<Domain>, gamma: f64, outputs: usize, table: Vec<f64>) -> Result<Self> {
        let k = regularity_floor(gamma)?;
        let layout = Arc::new(JetLayout::new(domain.dim(), outputs, k)?);
        Self::with_layout(domain, layout, gamma, table)
    }

    pub fn with_layout(domain: Arc<Domain>, layout: Arc<JetLayout>, gamma: f64, table: Vec<f64>) -> Result<Self> {
        if regularity_floor(gamma)? != layout.max_order() || layout.dim() != domain.dim() {
            return Err(Error::incompatible("layout does not match the domain or regularity"));
        }
        let expected = domain.len() * layout.point_block();
        if table.len() != expected {
            return Err(Error::param(format!(
                "jet table has {} entries, expected {expected}",
                table.len()
            )));
        }
        if table.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("jet table entries must be finite"));
        }
        Ok(JetFunction { domain, layout, gamma, table })
    }

    pub fn zeros(domain: Arc<Domain>, gamma: f64, outputs: usize) -> Result<Self> {
        let k = regularity_floor(gamma)?;
        let layout = JetLayout::new(domain.dim(), outputs, k)?;
        let table = vec![0.0; domain.len() * layout.point_block()];
        Self::with_layout(domain, Arc::new(layout), gamma, table)
    }

    /// Fills the table from `f(point, order, basis element) -> R^c`.
    pub fn from_fn<F>(domain: Arc<Domain>, gamma: f64, outputs: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, &MultiIndex) -> Vec<f64>,
    {
        let k = regularity_floor(gamma)?;
        let layout = JetLayout::new(domain.dim(), outputs, k)?;
        let mut table = Vec::with_capacity(domain.len() * layout.point_block());
        for p in 0..domain.len() {
            for j in 0..=k {
                for basis in layout.basis(j) {
                    let v = f(p, j, basis);
                    if v.len() != outputs {
                        return Err(Error::param("generator returned the wrong output dimension"));
                    }
                    table.extend(v);
                }
            }
        }
        Self::with_layout(domain, Arc::new(layout), gamma, table)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn max_order(&self) -> usize {
        self.layout.max_order()
    }

    pub fn outputs(&self) -> usize {
        self.layout.outputs()
    }

    /// The full table, one block of `layout().point_block()` slots per point.
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn point_block(&self, p: usize) -> &[f64] {
        let b = self.layout.point_block();
        &self.table[p * b..(p + 1) * b]
    }

    fn order_slice(&self, p: usize, j: usize) -> &[f64] {
        let block = self.point_block(p);
        &block[self.layout.order_offset(j)..self.layout.order_offset(j + 1)]
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order > self.max_order() {
            return Err(Error::OrderRange { order, max: self.max_order() });
        }
        Ok(())
    }

    /// `ψʲ(p)` as a stand-alone form.
    pub fn form(&self, p: usize, j: usize) -> Result<SymmetricForm> {
        self.check_order(j)?;
        Ok(SymmetricForm {
            order: j,
            dim: self.layout.dim(),
            outputs: self.outputs(),
            coeffs: self.order_slice(p, j).to_vec(),
        })
    }

    fn order_norm(&self, p: usize, j: usize) -> f64 {
        let coeffs = self.order_slice(p, j);
        if j == 0 {
            linalg::euclidean(coeffs)
        } else {
            weighted_spectral_norm(coeffs, self.layout.multiplicities(j), self.outputs())
        }
    }

    /// `Λˡ(p) = max_{j <= l} ‖ψʲ(p)‖`.
    pub fn lambda_l(&self, p: usize, l: usize) -> Result<f64> {
        self.check_order(l)?;
        Ok((0..=l).map(|j| self.order_norm(p, j)).fold(0.0, f64::max))
    }

    /// `Λˡ` at every point.
    pub fn lambda_profile(&self, l: usize) -> Result<Vec<f64>> {
        (0..self.domain.len()).map(|p| self.lambda_l(p, l)).collect()
    }

    /// Coefficients of `v ↦ Σ_s (1/s!) ψ^{j+s}(z)[v ⊗ wˢ]` for `s = 0..=k-j`,
    /// i.e. the order-`j` part of the Taylor expansion at `z` moved by `w`.
    fn shifted(&self, z: usize, j: usize, w: &[f64]) -> Vec<f64> {
        let layout = &*self.layout;
        let c = layout.outputs();
        let block = self.point_block(z);
        let nv = layout.basis(j).len();
        let mut out = vec![0.0; nv * c];
        let mut s_factorial = 1.0;
        for s in 0..=layout.max_order() - j {
            if s > 0 {
                s_factorial *= s as f64;
            }
            let shifts = layout.basis(s);
            let mult = layout.multiplicities(s);
            let ranks = layout.merge_ranks(j, s);
            let base = layout.order_offset(j + s);
            for (iw, basis_w) in shifts.iter().enumerate() {
                let weight = mult[iw] as f64 * basis_w.monomial(w) / s_factorial;
                if weight == 0.0 {
                    continue;
                }
                for iv in 0..nv {
                    let r = ranks[iv * shifts.len() + iw];
                    for coord in 0..c {
                        out[iv * c + coord] += weight * block[base + r * c + coord];
                    }
                }
            }
        }
        out
    }

    /// The remainder form `R_j(z, p)[v] = ψʲ(p)[v] − Σ_s (1/s!) ψ^{j+s}(z)[v ⊗ (p−z)ˢ]`.
    pub fn remainder_form(&self, j: usize, z: usize, p: usize) -> Result<SymmetricForm> {
        self.check_order(j)?;
        let w: Vec<f64> = self
            .domain
            .point(p)
            .iter()
            .zip(self.domain.point(z))
            .map(|(a, b)| a - b)
            .collect();
        let mut coeffs = self.shifted(z, j, &w);
        for (r, own) in coeffs.iter_mut().zip(self.order_slice(p, j)) {
            *r = own - *r;
        }
        Ok(SymmetricForm {
            order: j,
            dim: self.layout.dim(),
            outputs: self.outputs(),
            coeffs,
        })
    }

    /// `R_j(z, p)[v]` for a single ordered basis element `v`.
    pub fn remainder(&self, j: usize, z: usize, p: usize, v: &MultiIndex) -> Result<Vec<f64>> {
        if v.order() != j {
            return Err(Error::incompatible("basis element order differs from j"));
        }
        let form = self.remainder_form(j, z, p)?;
        Ok(form.value(v.rank(self.layout.dim())).to_vec())
    }

    /// Exact Lip(γ) norm on the finite domain: the larger of the bound
    /// condition and the Hölder quotients of all remainders over distinct
    /// ordered pairs.
    pub fn lip_norm(&self) -> f64 {
        let k = self.max_order();
        let n = self.domain.len();
        let mut best = 0.0f64;
        for p in 0..n {
            for j in 0..=k {
                best = best.max(self.order_norm(p, j));
            }
        }
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let dist = self.domain.distance(x, y);
                for l in 0..=k {
                    let r = self.remainder_form(l, x, y).expect("order within range");
                    best = best.max(r.operator_norm() / dist.powf(self.gamma - l as f64));
                }
            }
        }
        best
    }

    /// The local polynomial proposal `Ψ_x(v) = Σ_s (1/s!) ψˢ(x)[(v−x)ˢ]`.
    pub fn taylor_proposal(&self, x: usize, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.domain.dim() {
            return Err(Error::incompatible("evaluation point has the wrong dimension"));
        }
        let w: Vec<f64> = v.iter().zip(self.domain.point(x)).map(|(a, b)| a - b).collect();
        Ok(self.shifted(x, 0, &w))
    }

    pub fn is_compatible(&self, other: &JetFunction) -> bool {
        self.gamma == other.gamma
            && *self.layout == *other.layout
            && (Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain)
    }

    /// Slotwise `self - other`.
    pub fn sub(&self, other: &JetFunction) -> Result<JetFunction> {
        linear_combination(&[(1.0, self), (-1.0, other)])
    }

    /// Coefficient form matrix of `ψʲ(p)` as a `c x beta(d,j)` nalgebra matrix.
    pub fn form_matrix(&self, p: usize, j: usize) -> Result<DMatrix<f64>> {
        let f = self.form(p, j)?;
        let c = self.outputs();
        let cols = f.coeffs.len() / c;
        Ok(DMatrix::from_fn(c, cols, |s, r| f.coeffs[r * c + s]))
    }
}

/// `Σ coeff · jet`, slotwise. All jets must share domain, regularity and
/// output dimension.
pub fn linear_combination(terms: &[(f64, &JetFunction)]) -> Result<JetFunction> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| Error::incompatible("empty linear combination"))?;
    if let Some((_, bad)) = terms.iter().find(|(_, f)| !f.is_compatible(first)) {
        return Err(Error::incompatible(format!(
            "jets differ in domain or regularity (γ = {} vs {})",
            first.gamma, bad.gamma
        )));
    }
    let mut table = vec![0.0; first.table.len()];
    for &(a, f) in terms {
        for (t, v) in table.iter_mut().zip(&f.table) {
            *t += a * v;
        }
    }
    Ok(JetFunction {
        domain: first.domain.clone(),
        layout: first.layout.clone(),
        gamma: first.gamma,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enum_ordered;

    fn line(points: &[f64]) -> Arc<Domain> {
        Arc::new(Domain::new(points.iter().map(|&x| vec![x]).collect()).unwrap())
    }

    #[test]
    fn domain_rejects_duplicates() {
        assert!(Domain::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).is_err());
        assert!(Domain::new(vec![]).is_err());
        assert_eq!(Domain::new(vec![vec![0.0], vec![1.0]]).unwrap().len(), 2);
    }

    #[test]
    fn regularity() {
        assert_eq!(regularity_floor(1.0).unwrap(), 0);
        assert_eq!(regularity_floor(0.3).unwrap(), 0);
        assert_eq!(regularity_floor(2.0).unwrap(), 1);
        assert_eq!(regularity_floor(2.5).unwrap(), 2);
        assert!(regularity_floor(0.0).is_err());
    }

    #[test]
    fn operator_norm_examples() {
        let id = SymmetricForm::new(1, 2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((id.operator_norm() - 1.0).abs() < 1e-14);
        let mixed = SymmetricForm::new(2, 2, 1, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(mixed.expanded(), vec![0.0, 1.0, 1.0, 0.0]);
        assert!((mixed.operator_norm() - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(SymmetricForm::zeros(3, 2, 2).unwrap().operator_norm(), 0.0);
    }

    #[test]
    fn weighted_norm_matches_expansion() {
        // pseudo-random coefficients, c = 3, d = 3, j = 2
        let coeffs: Vec<f64> = (0..18).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let form = SymmetricForm::new(2, 3, 3, coeffs).unwrap();
        let expanded = form.expanded();
        let direct = linalg::spectral_norm(3, 9, &expanded);
        assert!((form.operator_norm() - direct).abs() < 1e-12 * direct);
    }

    fn jet_1d(points: &[f64], gamma: f64, rows: &[&[f64]]) -> JetFunction {
        let table = rows.iter().flat_map(|r| r.iter().copied()).collect();
        JetFunction::new(line(points), gamma, 1, table).unwrap()
    }

    #[test]
    fn lambda_examples() {
        let f = jet_1d(&[0.0], 2.0, &[&[2.0, 3.0]]);
        assert_eq!(f.lambda_l(0, 1).unwrap(), 3.0);
        assert_eq!(f.lambda_l(0, 0).unwrap(), 2.0);
        assert!(matches!(f.lambda_l(0, 2), Err(Error::OrderRange { .. })));
        let zero = JetFunction::zeros(line(&[0.0, 1.0]), 2.0, 1).unwrap();
        assert_eq!(zero.lambda_l(1, 1).unwrap(), 0.0);
    }

    #[test]
    fn remainder_examples() {
        // z = 0 with ψ⁰ = 1, ψ¹ = 2; p = 0.5 with ψ⁰ = 2.1
        let f = jet_1d(&[0.0, 0.5], 2.0, &[&[1.0, 2.0], &[2.1, 0.0]]);
        let r = f.remainder(0, 0, 1, &MultiIndex::empty()).unwrap();
        assert!((r[0] - 0.1).abs() < 1e-14);
        let same = f.remainder(1, 1, 1, &MultiIndex::new(vec![0], 1).unwrap()).unwrap();
        assert_eq!(same, vec![0.0]);
        let g = jet_1d(&[0.0, 1.0], 1.0, &[&[4.0], &[1.5]]);
        let r0 = g.remainder(0, 0, 1, &MultiIndex::empty()).unwrap();
        assert_eq!(r0, vec![1.5 - 4.0]);
    }

    #[test]
    fn lip_norm_examples() {
        assert_eq!(JetFunction::zeros(line(&[0.0, 1.0, 3.0]), 1.5, 1).unwrap().lip_norm(), 0.0);
        assert_eq!(jet_1d(&[0.0, 1.0, 2.0], 1.0, &[&[5.0], &[5.0], &[5.0]]).lip_norm(), 5.0);
        assert_eq!(jet_1d(&[0.0, 1.0], 1.0, &[&[0.0], &[3.0]]).lip_norm(), 3.0);
    }

    #[test]
    fn taylor_examples() {
        let f = jet_1d(&[0.0], 2.0, &[&[1.0, 2.0]]);
        assert_eq!(f.taylor_proposal(0, &[0.0]).unwrap(), vec![1.0]);
        assert!((f.taylor_proposal(0, &[0.25]).unwrap()[0] - 1.5).abs() < 1e-15);
        let zero = JetFunction::zeros(line(&[0.0]), 3.0, 1).unwrap();
        assert_eq!(zero.taylor_proposal(0, &[7.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn taylor_of_quadratic_in_two_dims() {
        // f(x, y) = x^2 + 3xy at (1, 2): f = 7, grad = (2x + 3y, 3x) = (8, 3),
        // hessian entries (2, 3, 0) on (11, 12, 22).
        let domain = Arc::new(Domain::new(vec![vec![1.0, 2.0]]).unwrap());
        let f = JetFunction::new(domain, 3.0, 1, vec![7.0, 8.0, 3.0, 2.0, 3.0, 0.0]).unwrap();
        let v = [0.5, -1.0];
        let exact = v[0] * v[0] + 3.0 * v[0] * v[1];
        assert!((f.taylor_proposal(0, &v).unwrap()[0] - exact).abs() < 1e-12);
    }

    #[test]
    fn linear_combination_examples() {
        let d = line(&[0.0, 1.0]);
        let f = JetFunction::new(d.clone(), 2.0, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = JetFunction::new(d.clone(), 2.0, 1, vec![0.5, -1.0, 2.0, 0.0]).unwrap();
        assert_eq!(linear_combination(&[(1.0, &f)]).unwrap(), f);
        let zero = linear_combination(&[(1.0, &f), (-1.0, &f)]).unwrap();
        assert!(zero.table().iter().all(|&x| x == 0.0));
        let h = linear_combination(&[(2.0, &f), (3.0, &g)]).unwrap();
        for i in 0..4 {
            assert_eq!(h.table()[i], 2.0 * f.table()[i] + 3.0 * g.table()[i]);
        }
        let other = JetFunction::new(d, 1.5, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(linear_combination(&[(1.0, &f), (1.0, &other)]).is_err());
        let wrong_gamma = JetFunction::new(line(&[0.0, 1.0]), 1.0, 1, vec![1.0, 2.0]).unwrap();
        assert!(linear_combination(&[(1.0, &f), (1.0, &wrong_gamma)]).is_err());
    }

    #[test]
    fn basis_sizes_match_table() {
        let domain = Arc::new(Domain::new(vec![vec![0.0, 0.0, 0.0]]).unwrap());
        let f = JetFunction::from_fn(domain, 2.5, 2, |_, j, b| vec![j as f64, b.order() as f64]).unwrap();
        assert_eq!(f.table().len(), 2 * (1 + 3 + 6));
        assert_eq!(enum_ordered(3, 2).len(), 6);
    }
}
