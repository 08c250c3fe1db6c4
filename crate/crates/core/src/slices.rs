//! Slices: duplicate-free vectors over the entries of a tuple.

use std::collections::{HashMap, HashSet};

use crate::structure::{Elem, Structure, TupId};

/// All non-empty duplicate-free vectors over `set(a)`, by arity and then
/// lexicographically by element id.
pub fn slices(a: &[Elem]) -> Vec<Vec<Elem>> {
    let mut elems: Vec<Elem> = a.to_vec();
    elems.sort_unstable();
    elems.dedup();
    let mut out = Vec::new();
    for len in 1..=elems.len() {
        let mut cur = Vec::with_capacity(len);
        let mut used = vec![false; elems.len()];
        extend(&elems, len, &mut cur, &mut used, &mut out);
    }
    out
}

fn extend(elems: &[Elem], len: usize, cur: &mut Vec<Elem>, used: &mut [bool], out: &mut Vec<Vec<Elem>>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    for i in 0..elems.len() {
        if !used[i] {
            used[i] = true;
            cur.push(elems[i]);
            extend(elems, len, cur, used, out);
            cur.pop();
            used[i] = false;
        }
    }
}

/// `S(Tup(A))`, the distinct slices of all tuples, in canonical order.
pub fn all_slices(a: &Structure) -> Vec<Vec<Elem>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for t in a.tuples() {
        for s in slices(&t.elems) {
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
    }
    out.sort_unstable_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    out
}

/// `S^{-1}(s)`: the tuples `a` with `set(s) ⊆ set(a)`.
pub fn slice_inverse(a: &Structure, s: &[Elem]) -> Vec<TupId> {
    let Some(&first) = s.first() else { return Vec::new() };
    let idx = a.element_index();
    let Some(candidates) = idx.get(first as usize) else { return Vec::new() };
    candidates.iter().copied().filter(|&t| s.iter().all(|e| a.tup(t).elems.contains(e))).collect()
}

/// The bijection `π_S` between `S(a)` and `S(b)` induced by `a_i ↦ b_i`.
/// Defined when `stp(a) = stp(b)`; returns `None` otherwise.
pub fn slice_bijection(a: &[Elem], b: &[Elem]) -> Option<HashMap<Vec<Elem>, Vec<Elem>>> {
    if a.len() != b.len() {
        return None;
    }
    let mut beta: HashMap<Elem, Elem> = HashMap::new();
    let mut back: HashMap<Elem, Elem> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if *beta.entry(x).or_insert(y) != y || *back.entry(y).or_insert(x) != x {
            return None;
        }
    }
    Some(slices(a).into_iter().map(|s| {
        let img = s.iter().map(|e| beta[e]).collect();
        (s, img)
    }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slices_of_repeated_tuple() {
        assert_eq!(slices(&[1, 1, 2]), vec![vec![1], vec![2], vec![1, 2], vec![2, 1]]);
        assert_eq!(slices(&[1, 2, 3]).len(), 3 + 6 + 6);
    }

    #[test]
    fn bijection_requires_equal_types() {
        assert!(slice_bijection(&[1, 1, 2], &[5, 6, 7]).is_none());
        let pi = slice_bijection(&[1, 1, 2], &[5, 5, 7]).unwrap();
        assert_eq!(pi[&vec![2, 1]], vec![7, 5]);
    }
}
