//! Similarity types `stp(a, b) = {(i, j) : a_i = b_j}`.

use std::fmt;

use crate::structure::{Elem, MAX_ARITY};

/// A similarity type of arity `(k, l)`, stored as a bit mask with bit
/// `i * 8 + j` set when `(i, j)` (0-based) is a member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimType {
    k: u8,
    l: u8,
    mask: u64,
}

const fn bit(i: usize, j: usize) -> u64 {
    1u64 << (i * MAX_ARITY + j)
}

impl SimType {
    pub fn empty(k: usize, l: usize) -> Self {
        debug_assert!(k <= MAX_ARITY && l <= MAX_ARITY);
        SimType { k: k as u8, l: l as u8, mask: 0 }
    }

    pub fn of(a: &[Elem], b: &[Elem]) -> Self {
        let mut mask = 0;
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if x == y {
                    mask |= bit(i, j);
                }
            }
        }
        SimType { k: a.len() as u8, l: b.len() as u8, mask }
    }

    /// `stp(a) = stp(a, a)`.
    pub fn diag(a: &[Elem]) -> Self {
        Self::of(a, a)
    }

    /// Builds a type from 0-based pairs. Panics on out-of-range positions.
    pub fn from_pairs(k: usize, l: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut t = Self::empty(k, l);
        for (i, j) in pairs {
            assert!(i < k && j < l, "pair ({i}, {j}) outside {k}x{l}");
            t.mask |= bit(i, j);
        }
        t
    }

    pub fn arities(self) -> (usize, usize) {
        (self.k as usize, self.l as usize)
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn contains(self, i: usize, j: usize) -> bool {
        i < self.k as usize && j < self.l as usize && self.mask & bit(i, j) != 0
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        assert!(i < self.k as usize && j < self.l as usize);
        self.mask |= bit(i, j);
    }

    /// 0-based pairs in lexicographic order.
    pub fn pairs(self) -> impl Iterator<Item = (usize, usize)> {
        let (k, l) = (self.k as usize, self.l as usize);
        (0..k).flat_map(move |i| (0..l).map(move |j| (i, j))).filter(move |&(i, j)| self.contains(i, j))
    }

    pub fn is_subset(self, other: SimType) -> bool {
        self.k == other.k && self.l == other.l && self.mask & !other.mask == 0
    }

    pub fn transpose(self) -> SimType {
        SimType::from_pairs(self.l as usize, self.k as usize, self.pairs().map(|(i, j)| (j, i)))
    }

    /// Positions `i` of the left vector that occur in some pair.
    pub fn left_positions(self) -> Vec<usize> {
        (0..self.k as usize).filter(|&i| (0..self.l as usize).any(|j| self.contains(i, j))).collect()
    }

    /// Canonical encoding: `k`, `l`, then the sorted 1-based pairs.
    pub fn encode(self) -> Vec<u8> {
        let mut out = vec![self.k, self.l];
        for (i, j) in self.pairs() {
            out.push(i as u8 + 1);
            out.push(j as u8 + 1);
        }
        out
    }

    /// Whether the type is realizable: a type of the form `stp(a, b)`.
    /// For `k == l` diagonal types this means an equivalence relation; in
    /// general, pairs must be closed under the induced equalities.
    pub fn is_consistent_diag(self) -> bool {
        let k = self.k as usize;
        if self.k != self.l {
            return false;
        }
        (0..k).all(|i| self.contains(i, i))
            && self.pairs().all(|(i, j)| self.contains(j, i))
            && self.pairs().all(|(i, j)| (0..k).all(|m| !self.contains(j, m) || self.contains(i, m)))
    }
}

impl fmt::Display for SimType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, (i, j)) in self.pairs().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "({},{})", i + 1, j + 1)?;
        }
        write!(f, "}}")
    }
}
