//! Counting and enumeration of symmetric tensor-basis elements.
//!
//! A symmetric `j`-linear form on `R^d` is determined by its values on the
//! ordered basis elements `e_{l1} ⊗ … ⊗ e_{lj}` with `l1 <= … <= lj`. This
//! module enumerates those index tuples in lexicographic order and provides
//! the counts `beta(d, j)`, `D(d, k)` and `Q(m, c, d, k)` built from them.
//!
//! Indices are stored 0-based. `Display` prints them 1-based, which is also
//! the convention used by the text file formats.

use std::fmt;

use crate::error::{Error, Result};

/// Largest ambient dimension accepted by the counting functions.
pub const MAX_DIM: usize = 16;
/// Largest tensor order accepted by the counting functions.
pub const MAX_ORDER: usize = 8;

fn check_range(d: usize, order: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::param(format!("dimension {d} outside 1..={MAX_DIM}")));
    }
    if order > MAX_ORDER {
        return Err(Error::param(format!("order {order} outside 0..={MAX_ORDER}")));
    }
    Ok(())
}

/// `beta(a, b) = binomial(a + b - 1, b)`, the number of nondecreasing
/// `b`-tuples over an alphabet of size `a`.
pub fn beta(a: usize, b: usize) -> Result<usize> {
    check_range(a, b)?;
    Ok(binomial(a + b - 1, b))
}

// Exact for the guarded range: intermediate values stay below 23 choose 8.
fn binomial(n: usize, r: usize) -> usize {
    let r = r.min(n - r);
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `D(d, k) = sum_{l=0}^{k} beta(d, l)`: the number of ordered basis
/// elements of all orders up to `k`.
pub fn dim_d(d: usize, k: usize) -> Result<usize> {
    check_range(d, k)?;
    Ok((0..=k).map(|l| binomial(d + l - 1, l)).sum())
}

/// `Q(m, c, d, k) = 1 + m c D(d, k)`: the support bound of a recombination
/// that matches every functional of order at most `k` at `m` points.
pub fn q_count(m: usize, c: usize, d: usize, k: usize) -> Result<usize> {
    if m == 0 || c == 0 {
        return Err(Error::param("point count and output dimension must be positive"));
    }
    let dk = dim_d(d, k)?;
    m.checked_mul(c)
        .and_then(|v| v.checked_mul(dk))
        .and_then(|v| v.checked_add(1))
        .ok_or_else(|| Error::param(format!("Q({m}, {c}, {d}, {k}) overflows")))
}

/// A nondecreasing index tuple naming an ordered tensor-basis element.
///
/// The empty tuple is the scalar slot of order zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    /// Builds a multi-index from 0-based entries, which must be
    /// nondecreasing and below `d`.
    pub fn new(indices: Vec<usize>, d: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::param(format!("multi-index {indices:?} is not nondecreasing")));
        }
        if indices.iter().any(|&i| i >= d) {
            return Err(Error::param(format!("multi-index {indices:?} has an entry >= {d}")));
        }
        Ok(MultiIndex(indices))
    }

    /// Sorts arbitrary entries into canonical order.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        MultiIndex(indices)
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Canonical merge of two multi-indices (the basis element of `v ⊗ w`
    /// up to permutation).
    pub fn merge(&self, other: &MultiIndex) -> MultiIndex {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] <= other.0[j] {
                out.push(self.0[i]);
                i += 1;
            } else {
                out.push(other.0[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        MultiIndex(out)
    }

    /// Number of distinct permutations of the tuple.
    pub fn multiplicity(&self) -> usize {
        let mut result = factorial(self.0.len());
        let mut run = 1;
        for w in self.0.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                result /= factorial(run);
                run = 1;
            }
        }
        result / factorial(run)
    }

    /// Position of this multi-index in `enum_ordered(d, order)`.
    pub fn rank(&self, d: usize) -> usize {
        let j = self.0.len();
        let mut rank = 0;
        let mut lower = 0;
        for (pos, &v) in self.0.iter().enumerate() {
            let remaining = j - pos - 1;
            for u in lower..v {
                // tuples whose entry at `pos` is `u`, tail over {u..d}
                rank += binomial(d - u + remaining - 1, remaining);
            }
            lower = v;
        }
        rank
    }

    /// `prod_i w[l_i]`.
    pub fn monomial(&self, w: &[f64]) -> f64 {
        self.0.iter().map(|&i| w[i]).product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, ")")
    }
}

/// `multiplicity` as a free function.
pub fn multiplicity(m: &MultiIndex) -> usize {
    m.multiplicity()
}

pub(crate) fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// All nondecreasing `j`-tuples over `0..d`, lexicographically sorted.
pub fn enum_ordered(d: usize, j: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(j);
    fill_ordered(d, j, 0, &mut current, &mut out);
    out
}

fn fill_ordered(d: usize, j: usize, lower: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if current.len() == j {
        out.push(MultiIndex(current.clone()));
        return;
    }
    for v in lower..d {
        current.push(v);
        fill_ordered(d, j, v, current, out);
        current.pop();
    }
}

/// Storage layout of a jet table: for every order `j <= k` the ordered
/// basis elements, each carrying `c` output coordinates.
///
/// Slot order within one point is (order, lexicographic basis, output
/// coordinate), which is also the canonical functional order.
#[derive(Clone, Debug, PartialEq)]
pub struct JetLayout {
    d: usize,
    c: usize,
    k: usize,
    bases: Vec<Vec<MultiIndex>>,
    offsets: Vec<usize>,
    multiplicities: Vec<Vec<usize>>,
    // merge_ranks[j][s][rank_v * beta(d, s) + rank_w] = rank of merge(v, w)
    merge_ranks: Vec<Vec<Vec<usize>>>,
}

impl JetLayout {
    pub fn new(d: usize, c: usize, k: usize) -> Result<Self> {
        check_range(d, k)?;
        if c == 0 {
            return Err(Error::param("output dimension must be positive"));
        }
        let bases: Vec<_> = (0..=k).map(|j| enum_ordered(d, j)).collect();
        let mut offsets = Vec::with_capacity(k + 2);
        let mut acc = 0;
        for b in &bases {
            offsets.push(acc);
            acc += b.len();
        }
        offsets.push(acc);
        let multiplicities = bases
            .iter()
            .map(|b| b.iter().map(MultiIndex::multiplicity).collect())
            .collect();
        let merge_ranks = (0..=k)
            .map(|j| {
                (0..=k - j)
                    .map(|s| {
                        let mut table = Vec::with_capacity(bases[j].len() * bases[s].len());
                        for v in &bases[j] {
                            for w in &bases[s] {
                                table.push(v.merge(w).rank(d));
                            }
                        }
                        table
                    })
                    .collect()
            })
            .collect();
        Ok(JetLayout {
            d,
            c,
            k,
            bases,
            offsets,
            multiplicities,
            merge_ranks,
        })
    }

    /// Multiplicities of the ordered basis elements of `order`.
    pub fn multiplicities(&self, order: usize) -> &[usize] {
        &self.multiplicities[order]
    }

    /// Ranks of `merge(v, w)` for `v` of order `j` and `w` of order `s`,
    /// laid out as `[rank_v * beta(d, s) + rank_w]`. Requires `j + s <= k`.
    pub fn merge_ranks(&self, j: usize, s: usize) -> &[usize] {
        &self.merge_ranks[j][s]
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn outputs(&self) -> usize {
        self.c
    }

    pub fn max_order(&self) -> usize {
        self.k
    }

    pub fn basis(&self, order: usize) -> &[MultiIndex] {
        &self.bases[order]
    }

    /// Number of ordered basis elements of all orders `<= level`.
    pub fn basis_count_upto(&self, level: usize) -> usize {
        self.offsets[level + 1]
    }

    /// Slots per point up to `level` (`c D(d, level)`).
    pub fn slots_upto(&self, level: usize) -> usize {
        self.c * self.offsets[level + 1]
    }

    /// Slots per point for the full table.
    pub fn point_block(&self) -> usize {
        self.slots_upto(self.k)
    }

    /// Offset within a point block of the first slot of `order`.
    pub fn order_offset(&self, order: usize) -> usize {
        self.c * self.offsets[order]
    }

    /// Offset within a point block of `(order, basis rank, coordinate)`.
    pub fn slot(&self, order: usize, rank: usize, coord: usize) -> usize {
        self.c * (self.offsets[order] + rank) + coord
    }

    /// Inverse of `slot`.
    pub fn decode(&self, slot: usize) -> (usize, usize, usize) {
        let coord = slot % self.c;
        let basis = slot / self.c;
        let order = self.offsets.partition_point(|&o| o <= basis) - 1;
        (order, basis - self.offsets[order], coord)
    }
}
