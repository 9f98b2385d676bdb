//! Point-evaluation functionals against ordered tensor-basis elements.
//!
//! A functional `δ_{p,j,v,s}` reads output coordinate `s` of `ψʲ(p)[v]`.
//! Because jets store exactly these values, evaluation is a table lookup and
//! the canonical functional order (point, order, basis, coordinate) coincides
//! with the storage order of a jet table.

use nalgebra::DMatrix;

use crate::combinatorics::{JetLayout, MultiIndex};
use crate::error::{Error, Result};
use crate::jets::JetFunction;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunctionalId {
    pub point: usize,
    pub order: usize,
    pub basis: MultiIndex,
    pub out_coord: usize,
}

impl FunctionalId {
    /// Offset of this functional inside a jet table with the given layout.
    pub fn table_index(&self, layout: &JetLayout) -> usize {
        self.point * layout.point_block()
            + layout.slot(self.order, self.basis.rank(layout.dim()), self.out_coord)
    }
}

/// An ordered family of functionals together with the table offsets they
/// read.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalSet {
    ids: Vec<FunctionalId>,
    slots: Vec<usize>,
    level: usize,
}

impl FunctionalSet {
    pub fn ids(&self) -> &[FunctionalId] {
        &self.ids
    }

    /// Jet-table offsets, aligned with `ids`.
    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Concatenates `tau(p, level)` over the listed points.
    pub fn over_points(layout: &JetLayout, points: &[usize], level: usize) -> Result<Self> {
        if level > layout.max_order() {
            return Err(Error::OrderRange { order: level, max: layout.max_order() });
        }
        let mut ids = Vec::with_capacity(points.len() * layout.slots_upto(level));
        let mut slots = Vec::with_capacity(ids.capacity());
        for &p in points {
            for slot in 0..layout.slots_upto(level) {
                let (order, rank, out_coord) = layout.decode(slot);
                ids.push(FunctionalId {
                    point: p,
                    order,
                    basis: layout.basis(order)[rank].clone(),
                    out_coord,
                });
                slots.push(p * layout.point_block() + slot);
            }
        }
        Ok(FunctionalSet { ids, slots, level })
    }

    /// Reorders the set by `perm` (`new[i] = old[perm[i]]`).
    pub fn permuted(&self, perm: &[usize]) -> FunctionalSet {
        FunctionalSet {
            ids: perm.iter().map(|&i| self.ids[i].clone()).collect(),
            slots: perm.iter().map(|&i| self.slots[i]).collect(),
            level: self.level,
        }
    }
}

/// `Τ_{p,l}`: every functional at `p` of order at most `l`.
pub fn tau(layout: &JetLayout, p: usize, l: usize) -> Result<FunctionalSet> {
    FunctionalSet::over_points(layout, &[p], l)
}

/// `Σ*_q`: `tau(p, q)` over every point of a domain with `points` entries.
pub fn sigma_star(layout: &JetLayout, points: usize, q: usize) -> Result<FunctionalSet> {
    let all: Vec<usize> = (0..points).collect();
    FunctionalSet::over_points(layout, &all, q)
}

fn check_functional(sigma: &FunctionalId, f: &JetFunction) -> Result<()> {
    let layout = f.layout();
    if sigma.point >= f.domain().len()
        || sigma.order > layout.max_order()
        || sigma.basis.order() != sigma.order
        || sigma.basis.indices().iter().any(|&i| i >= layout.dim())
        || sigma.out_coord >= layout.outputs()
    {
        return Err(Error::incompatible(format!("functional {sigma:?} does not fit the jet")));
    }
    Ok(())
}

pub fn eval_functional(sigma: &FunctionalId, f: &JetFunction) -> Result<f64> {
    check_functional(sigma, f)?;
    Ok(f.table()[sigma.table_index(f.layout())])
}

fn check_set(set: &FunctionalSet, f: &JetFunction) -> Result<()> {
    match set.ids.iter().max_by_key(|id| id.point) {
        Some(id) if id.point >= f.domain().len() => {
            Err(Error::incompatible("functional set refers to points outside the domain"))
        }
        _ if set.level > f.max_order() => Err(Error::OrderRange { order: set.level, max: f.max_order() }),
        _ => Ok(()),
    }
}

/// `|L| x n` matrix of `σ_r(f_i)`.
pub fn eval_matrix(features: &[JetFunction], set: &FunctionalSet) -> Result<DMatrix<f64>> {
    if let Some(first) = features.first() {
        if features.iter().any(|f| !f.is_compatible(first)) {
            return Err(Error::incompatible("features do not share a domain"));
        }
        check_set(set, first)?;
    }
    Ok(DMatrix::from_fn(set.len(), features.len(), |r, i| {
        features[i].table()[set.slots[r]]
    }))
}

/// `max_{σ ∈ L} |σ(φ − u)|` and the first functional attaining it.
pub fn max_abs_residual(phi: &JetFunction, u: &JetFunction, set: &FunctionalSet) -> Result<(f64, FunctionalId)> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if !phi.is_compatible(u) {
        return Err(Error::incompatible("target and approximation differ in domain or regularity"));
    }
    check_set(set, phi)?;
    let (best, value) = argmax_abs(set.slots.iter().map(|&s| phi.table()[s] - u.table()[s]));
    Ok((value, set.ids[best].clone()))
}

/// Index and value of the largest absolute entry; ties go to the first.
pub(crate) fn argmax_abs(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::combinatorics::dim_d;
    use crate::jets::Domain;

    #[test]
    fn tau_cardinality_examples() {
        assert_eq!(tau(&JetLayout::new(1, 1, 0).unwrap(), 0, 0).unwrap().len(), 1);
        assert_eq!(tau(&JetLayout::new(2, 2, 1).unwrap(), 0, 1).unwrap().len(), 6);
        assert_eq!(tau(&JetLayout::new(3, 1, 2).unwrap(), 0, 2).unwrap().len(), 10);
        assert!(tau(&JetLayout::new(3, 1, 2).unwrap(), 0, 3).is_err());
    }

    #[test]
    fn sigma_star_examples() {
        let l = JetLayout::new(2, 1, 1).unwrap();
        assert_eq!(sigma_star(&l, 1, 1).unwrap(), tau(&l, 0, 1).unwrap());
        assert_eq!(sigma_star(&l, 5, 1).unwrap().len(), 15);
        assert_eq!(sigma_star(&JetLayout::new(2, 2, 1).unwrap(), 3, 0).unwrap().len(), 6);
        assert_eq!(
            sigma_star(&JetLayout::new(2, 3, 2).unwrap(), 4, 2).unwrap().len(),
            3 * dim_d(2, 2).unwrap() * 4
        );
    }

    #[test]
    fn canonical_order_is_sorted() {
        let l = JetLayout::new(3, 2, 2).unwrap();
        let set = sigma_star(&l, 3, 2).unwrap();
        assert!(set.ids().windows(2).all(|w| w[0] < w[1]));
        assert!(set.slots().windows(2).all(|w| w[0] + 1 == w[1]));
    }

    fn jet(table: Vec<f64>, points: usize) -> JetFunction {
        let domain = Arc::new(Domain::new((0..points).map(|i| vec![i as f64]).collect()).unwrap());
        JetFunction::new(domain, 2.0, 1, table).unwrap()
    }

    #[test]
    fn eval_lookup() {
        let f = jet(vec![1.0, 7.0], 1);
        let sigma = FunctionalId { point: 0, order: 1, basis: MultiIndex::new(vec![0], 1).unwrap(), out_coord: 0 };
        assert_eq!(eval_functional(&sigma, &f).unwrap(), 7.0);
        let zero = jet(vec![0.0, 0.0], 1);
        assert_eq!(eval_functional(&sigma, &zero).unwrap(), 0.0);
        let bad = FunctionalId { point: 3, ..sigma };
        assert!(eval_functional(&bad, &f).is_err());
    }

    #[test]
    fn matrix_columns_are_functional_values() {
        let f = jet(vec![1.0, 2.0, 3.0, 4.0], 2);
        let g = jet(vec![-1.0, 0.5, 0.0, 9.0], 2);
        let set = sigma_star(f.layout(), 2, 1).unwrap();
        let m = eval_matrix(&[f.clone(), g.clone()], &set).unwrap();
        for (r, id) in set.ids().iter().enumerate() {
            assert_eq!(m[(r, 0)], eval_functional(id, &f).unwrap());
            assert_eq!(m[(r, 1)], eval_functional(id, &g).unwrap());
        }
        assert_eq!(eval_matrix(&[], &set).unwrap().ncols(), 0);
    }

    #[test]
    fn residual_scan() {
        let f = jet(vec![1.0, 2.0, 3.0, 4.0], 2);
        let g = jet(vec![1.0, 2.0, 0.0, 4.0], 2);
        let set = sigma_star(f.layout(), 2, 1).unwrap();
        let (v, id) = max_abs_residual(&f, &f, &set).unwrap();
        assert_eq!((v, &id), (0.0, &set.ids()[0]));
        let (v, id) = max_abs_residual(&f, &g, &set).unwrap();
        assert_eq!((v, id.point, id.order), (3.0, 1, 0));
        let empty = FunctionalSet::over_points(f.layout(), &[], 1).unwrap();
        assert!(matches!(max_abs_residual(&f, &g, &empty), Err(Error::EmptySet)));
    }
}
