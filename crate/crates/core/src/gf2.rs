//! Linear algebra over GF(2): dense bit vectors, sparse boundary matrices
//! and an incremental echelon basis used for quotient computations.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Dense bit vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gf2Vec {
    len: usize,
    words: Vec<u64>,
}

impl Gf2Vec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.flip(i);
        }
        v
    }

    /// Low `len` bits of `bits` (requires `len <= 64`).
    pub fn from_u64(len: usize, bits: u64) -> Self {
        assert!(len <= 64);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == 64 { bits } else { bits & ((1u64 << len) - 1) };
        }
        v
    }

    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        if self.get(i) != value {
            self.flip(i);
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Gf2Vec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Gf2Vec) -> Gf2Vec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// Index of the lowest set bit.
    pub fn lowest_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
}

impl fmt::Debug for Gf2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        write!(f, "Gf2Vec({s})")
    }
}

/// Sparse GF(2) matrix stored column-wise: `columns[c]` lists the rows
/// holding a one in column `c`, sorted and without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseGf2 {
    rows: usize,
    columns: Vec<Vec<usize>>,
}

impl SparseGf2 {
    /// Builds a matrix from column supports. Repeated row indices cancel
    /// pairwise, as they would in a GF(2) sum.
    pub fn from_columns(rows: usize, columns: Vec<Vec<usize>>) -> Self {
        let columns = columns
            .into_iter()
            .map(|mut col| {
                col.sort_unstable();
                let mut reduced: Vec<usize> = Vec::with_capacity(col.len());
                for r in col {
                    assert!(r < rows, "row index {r} out of range {rows}");
                    if reduced.last() == Some(&r) {
                        reduced.pop();
                    } else {
                        reduced.push(r);
                    }
                }
                reduced
            })
            .collect();
        Self { rows, columns }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, c: usize) -> &[usize] {
        &self.columns[c]
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn column_weights(&self) -> impl Iterator<Item = usize> + '_ {
        self.columns.iter().map(Vec::len)
    }

    pub fn row_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.rows];
        for col in &self.columns {
            for &r in col {
                w[r] += 1;
            }
        }
        w
    }

    pub fn transpose(&self) -> SparseGf2 {
        let mut cols = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &r in col {
                cols[r].push(c);
            }
        }
        SparseGf2 {
            rows: self.columns.len(),
            columns: cols,
        }
    }

    /// `self * other` over GF(2).
    pub fn compose(&self, other: &SparseGf2) -> SparseGf2 {
        assert_eq!(self.cols(), other.rows, "dimension mismatch in compose");
        let columns = other
            .columns
            .iter()
            .map(|col| {
                let mut acc = Gf2Vec::zeros(self.rows);
                for &k in col {
                    for &r in &self.columns[k] {
                        acc.flip(r);
                    }
                }
                acc.ones().collect()
            })
            .collect();
        SparseGf2 {
            rows: self.rows,
            columns,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &Gf2Vec) -> Gf2Vec {
        assert_eq!(x.len(), self.cols());
        let mut out = Gf2Vec::zeros(self.rows);
        for c in x.ones() {
            for &r in &self.columns[c] {
                out.flip(r);
            }
        }
        out
    }

    pub fn column_vec(&self, c: usize) -> Gf2Vec {
        Gf2Vec::from_indices(self.rows, self.columns[c].iter().copied())
    }

    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new(self.rows);
        for c in 0..self.cols() {
            basis.insert(self.column_vec(c));
        }
        basis.rank()
    }

    /// Basis of the null space, by Gaussian elimination on the columns
    /// while tracking the combination that produced each reduced column.
    pub fn kernel_basis(&self) -> Vec<Gf2Vec> {
        let n = self.cols();
        let mut pivots: Vec<(usize, Gf2Vec, Gf2Vec)> = Vec::new();
        let mut kernel = Vec::new();
        for c in 0..n {
            let mut v = self.column_vec(c);
            let mut combo = Gf2Vec::zeros(n);
            combo.flip(c);
            loop {
                let Some(lead) = v.lowest_one() else { break };
                match pivots.iter().find(|(p, _, _)| *p == lead) {
                    Some((_, pv, pc)) => {
                        v.xor_assign(pv);
                        combo.xor_assign(pc);
                    }
                    None => break,
                }
            }
            match v.lowest_one() {
                Some(lead) => pivots.push((lead, v, combo)),
                None => kernel.push(combo),
            }
        }
        kernel
    }
}

/// Row-echelon basis of a subspace, with deterministic pivoting on the
/// lowest set bit. Reduction modulo the subspace yields a canonical coset
/// representative.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    dim: usize,
    // (pivot bit, vector), kept fully reduced: no vector has another's pivot set.
    rows: Vec<(usize, Gf2Vec)>,
}

impl EchelonBasis {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> impl Iterator<Item = &Gf2Vec> {
        self.rows.iter().map(|(_, v)| v)
    }

    /// Canonical representative of `v` modulo the span.
    pub fn reduce(&self, v: &Gf2Vec) -> Gf2Vec {
        let mut out = v.clone();
        for (p, row) in &self.rows {
            if out.get(*p) {
                out.xor_assign(row);
            }
        }
        out
    }

    pub fn contains(&self, v: &Gf2Vec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span; returns false if it was already contained.
    pub fn insert(&mut self, v: Gf2Vec) -> bool {
        assert_eq!(v.len(), self.dim);
        let r = self.reduce(&v);
        let Some(p) = r.lowest_one() else {
            return false;
        };
        for (_, row) in self.rows.iter_mut() {
            if row.get(p) {
                row.xor_assign(&r);
            }
        }
        self.rows.push((p, r));
        true
    }

    /// Pivot positions in insertion order.
    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|(p, _)| *p).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_rows_cancel() {
        let m = SparseGf2::from_columns(4, vec![vec![1, 3, 1], vec![]]);
        assert_eq!(m.column(0), &[3]);
    }

    #[test]
    fn kernel_of_cycle_boundary() {
        // Boundary of a triangle: edges 0,1,2 over vertices 0,1,2.
        let m = SparseGf2::from_columns(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]);
        let ker = m.kernel_basis();
        assert_eq!(ker.len(), 1);
        assert_eq!(ker[0].weight(), 3);
        assert!(m.apply(&ker[0]).is_zero());
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn echelon_reduce_is_canonical() {
        let mut b = EchelonBasis::new(5);
        b.insert(Gf2Vec::from_indices(5, [0, 2]));
        b.insert(Gf2Vec::from_indices(5, [2, 4]));
        let x = Gf2Vec::from_indices(5, [1]);
        let y = x.xor(&Gf2Vec::from_indices(5, [0, 4]));
        assert_eq!(b.reduce(&x), b.reduce(&y));
        assert!(!b.insert(Gf2Vec::from_indices(5, [0, 4])));
    }

    #[test]
    fn compose_transpose() {
        let a = SparseGf2::from_columns(3, vec![vec![0, 1], vec![1, 2]]);
        let at = a.transpose();
        assert_eq!(at.rows(), 2);
        assert_eq!(at.column(1), &[0, 1]);
        let prod = at.compose(&a);
        // [[0,1],[1,0]] since column overlaps are {1}.
        assert_eq!(prod.column(0), &[1]);
        assert_eq!(prod.column(1), &[0]);
    }
}
