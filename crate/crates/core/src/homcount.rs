//! Homomorphism counts: brute force, join-tree dynamic programming, and tree
//! DP on colored multigraphs.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use crate::acyclic::{gyo_join_tree, random_acyclic, structure_from_print, validate_join_tree, AcyclicError, JoinTree, Print, PrintEdge, PrintNode};
use crate::multigraph::ColoredMultigraph;
use crate::structure::{Elem, Structure, TupId};
use crate::types::SimType;

/// Largest search space, in bits, that `hom_bruteforce` accepts.
pub const BRUTE_FORCE_BITS: f64 = 40.0;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum HomError {
    #[error("brute force would enumerate 2^{0:.1} maps")]
    TooLarge(f64),
    #[error("signatures differ")]
    SignatureMismatch,
    #[error("label registries differ")]
    NamespaceMismatch,
    #[error("source graph is not a multitree")]
    NotMultitree,
    #[error(transparent)]
    JoinTree(#[from] AcyclicError),
}

/// Counts maps `V(C) → V(A)` preserving every relation, by backtracking over
/// the elements of `C` in id order.
pub fn hom_bruteforce(c: &Structure, a: &Structure) -> Result<BigUint, HomError> {
    if c.signature() != a.signature() {
        return Err(HomError::SignatureMismatch);
    }
    let n = c.universe_size();
    let m = a.universe_size();
    if n > 0 && m > 1 {
        let bits = n as f64 * (m as f64).log2();
        if bits > BRUTE_FORCE_BITS {
            return Err(HomError::TooLarge(bits));
        }
    }
    // Tuples checked once their largest element is assigned.
    let mut checks: Vec<Vec<TupId>> = vec![Vec::new(); n];
    for t in c.tup_ids() {
        let last = *c.tup(t).elems.iter().max().expect("non-empty tuple");
        checks[last as usize].push(t);
    }
    let mut h: Vec<Elem> = vec![0; n];
    let mut image = Vec::new();
    Ok(extend(c, a, &checks, &mut h, &mut image, 0))
}

fn extend(c: &Structure, a: &Structure, checks: &[Vec<TupId>], h: &mut Vec<Elem>, image: &mut Vec<Elem>, v: usize) -> BigUint {
    if v == h.len() {
        return BigUint::one();
    }
    let mut total = BigUint::zero();
    for x in 0..a.universe_size() as Elem {
        h[v] = x;
        let ok = checks[v].iter().all(|&t| {
            let tup = c.tup(t);
            image.clear();
            image.extend(tup.elems.iter().map(|&e| h[e as usize]));
            let atp = a.atp(image);
            tup.atp.iter().all(|r| atp.contains(r))
        });
        if ok {
            total += extend(c, a, checks, h, image, v + 1);
        }
    }
    total
}

/// Tuples of `A` that a tuple of `C` with the given atomic and similarity
/// type may be mapped to.
fn candidates<'a>(c: &Structure, t: TupId, a: &'a Structure) -> Vec<&'a [Elem]> {
    let tup = c.tup(t);
    let need = SimType::diag(&tup.elems);
    a.relation(tup.atp[0])
        .iter()
        .filter(|x| need.is_subset(SimType::diag(x)) && tup.atp.iter().all(|&r| a.contains(r, x)))
        .map(Vec::as_slice)
        .collect()
}

/// Join-tree dynamic programming. Tables run from the leaves to the root and
/// are keyed by the images of the elements shared with the parent.
pub fn hom_acyclic(c: &Structure, j: &JoinTree, a: &Structure) -> Result<BigUint, HomError> {
    if c.signature() != a.signature() {
        return Err(HomError::SignatureMismatch);
    }
    validate_join_tree(c, j)?;
    if c.size() == 0 {
        return Ok(BigUint::one());
    }
    let (parent, order) = j.rooted(TupId(0));
    let n = c.size();
    let mut cands: Vec<Vec<&[Elem]>> = (0..n).map(|t| candidates(c, TupId(t as u32), a)).collect();
    let mut counts: Vec<Vec<BigUint>> = cands.iter().map(|v| vec![BigUint::one(); v.len()]).collect();
    for &t in order.iter().rev() {
        let Some(p) = parent[t.index()] else { continue };
        let ct = &c.tup(t).elems;
        let cp = &c.tup(p).elems;
        // Shared elements as (position in child, position in parent).
        let mut shared: Vec<(usize, usize)> = Vec::new();
        for (i, x) in ct.iter().enumerate() {
            if let Some(q) = cp.iter().position(|y| y == x) {
                if !shared.iter().any(|&(i2, _)| ct[i2] == *x) {
                    shared.push((i, q));
                }
            }
        }
        let mut summary: HashMap<Vec<Elem>, BigUint> = HashMap::new();
        for (img, cnt) in cands[t.index()].iter().zip(&counts[t.index()]) {
            if cnt.is_zero() {
                continue;
            }
            let key: Vec<Elem> = shared.iter().map(|&(i, _)| img[i]).collect();
            *summary.entry(key).or_default() += cnt;
        }
        let pc = std::mem::take(&mut counts[p.index()]);
        counts[p.index()] = cands[p.index()]
            .iter()
            .zip(pc)
            .map(|(img, cnt)| {
                if cnt.is_zero() {
                    return cnt;
                }
                let key: Vec<Elem> = shared.iter().map(|&(_, q)| img[q]).collect();
                match summary.get(&key) {
                    Some(s) => cnt * s,
                    None => BigUint::zero(),
                }
            })
            .collect();
        cands[t.index()].clear();
    }
    Ok(counts[0].iter().sum())
}

/// `hom(C, A)` via the join tree when `C` is acyclic, brute force otherwise.
pub fn hom_count(c: &Structure, a: &Structure) -> Result<BigUint, HomError> {
    match gyo_join_tree(c) {
        Some(j) => hom_acyclic(c, &j, a),
        None => hom_bruteforce(c, a),
    }
}

/// Homomorphisms from a multigraph whose Gaifman graph is a forest into an
/// arbitrary multigraph with the same labels.
pub fn hom_multigraph(t: &ColoredMultigraph, g: &ColoredMultigraph) -> Result<BigUint, HomError> {
    if t.registry() != g.registry() {
        return Err(HomError::NamespaceMismatch);
    }
    let n = t.node_count();
    let tadj = t.neighbor_lists();
    let gadj = g.neighbor_lists();

    let mut parent: Vec<Option<u32>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut roots = Vec::new();
    for r in 0..n as u32 {
        if seen[r as usize] {
            continue;
        }
        roots.push(r);
        seen[r as usize] = true;
        let start = order.len();
        order.push(r);
        let mut i = start;
        while i < order.len() {
            let v = order[i];
            for &w in &tadj[v as usize] {
                if Some(w) == parent[v as usize] {
                    continue;
                }
                if seen[w as usize] {
                    return Err(HomError::NotMultitree);
                }
                seen[w as usize] = true;
                parent[w as usize] = Some(v);
                order.push(w);
            }
            i += 1;
        }
    }

    let fits = |x: u32, y: u32| -> bool {
        let gl = g.labels(y);
        t.labels(x).iter().all(|l| gl.binary_search(l).is_ok())
            && t.edge_labels(x, x).iter().all(|e| g.has_edge(y, y, e.label))
    };
    let m = g.node_count();
    let mut counts: Vec<Vec<BigUint>> = (0..n as u32)
        .map(|x| (0..m as u32).map(|y| if fits(x, y) { BigUint::one() } else { BigUint::zero() }).collect())
        .collect();
    for &x in order.iter().rev() {
        let Some(p) = parent[x as usize] else { continue };
        let down = t.edge_labels(p, x);
        let up = t.edge_labels(x, p);
        let child = std::mem::take(&mut counts[x as usize]);
        for y in 0..m as u32 {
            if counts[p as usize][y as usize].is_zero() {
                continue;
            }
            let mut sum = BigUint::zero();
            for z in gadj[y as usize].iter().copied().chain(std::iter::once(y)) {
                if child[z as usize].is_zero() {
                    continue;
                }
                if down.iter().all(|e| g.has_edge(y, z, e.label)) && up.iter().all(|e| g.has_edge(z, y, e.label)) {
                    sum += &child[z as usize];
                }
            }
            counts[p as usize][y as usize] *= sum;
        }
    }
    let mut total = BigUint::one();
    for r in roots {
        total *= counts[r as usize].iter().sum::<BigUint>();
    }
    Ok(total)
}

/// A connected acyclic structure with different hom counts into two
/// structures.
#[derive(Clone, Debug)]
pub struct Separator {
    pub structure: Structure,
    pub join_tree: JoinTree,
    pub hom_a: BigUint,
    pub hom_b: BigUint,
}

/// Tree unfolding of `a` from `root`: breadth-first over overlapping tuples,
/// never stepping back to the tuple just left, cut off after `nodes` nodes.
pub fn unfolding_print(a: &Structure, root: TupId, nodes: usize) -> Print {
    let neighbors = a.overlaps();
    let node = |t: TupId| PrintNode { atp: a.tup(t).atp.clone(), stp: SimType::diag(&a.tup(t).elems) };
    let mut print = Print { nodes: vec![node(root)], edges: Vec::new() };
    // (print node, underlying tuple, underlying parent)
    let mut queue = std::collections::VecDeque::from([(0usize, root, None::<TupId>)]);
    while let Some((u, t, from)) = queue.pop_front() {
        for &(b, stp) in &neighbors[t.index()] {
            if print.nodes.len() >= nodes {
                return print;
            }
            if b == t || Some(b) == from {
                continue;
            }
            let v = print.nodes.len();
            print.nodes.push(node(b));
            print.edges.push(PrintEdge { u, v, stp });
            queue.push_back((v, b, Some(t)));
        }
    }
    print
}

/// Searches connected acyclic structures with at most `max_nodes` tuples
/// for one that separates `a` and `b` by hom counts. Candidates are the
/// unfoldings of every tuple of either side, then `random_samples` random
/// acyclic structures.
pub fn find_separator<R: Rng>(a: &Structure, b: &Structure, max_nodes: usize, random_samples: usize, rng: &mut R) -> Option<Separator> {
    let sig = a.signature();
    let test = |c: Structure, j: JoinTree| -> Option<Separator> {
        let hom_a = hom_acyclic(&c, &j, a).ok()?;
        let hom_b = hom_acyclic(&c, &j, b).ok()?;
        (hom_a != hom_b).then_some(Separator { structure: c, join_tree: j, hom_a, hom_b })
    };
    for nodes in 1..=max_nodes {
        for s in [a, b] {
            for t in s.tup_ids() {
                let p = unfolding_print(s, t, nodes);
                if p.nodes.len() < nodes {
                    continue;
                }
                if let Ok((c, j)) = structure_from_print(sig, &p, 0) {
                    if let Some(sep) = test(c, j) {
                        return Some(sep);
                    }
                }
            }
        }
    }
    for _ in 0..random_samples {
        let nodes = rng.gen_range(1..=max_nodes.max(1));
        let (c, j) = random_acyclic(sig, nodes, rng);
        if let Some(sep) = test(c, j) {
            return Some(sep);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_structure;
    use crate::representations::{grep, jtrep};

    #[test]
    fn path_into_triangle() {
        let c = parse_structure("signature: E/2\nE(x,y)\nE(y,z)\n", false).unwrap();
        let a = parse_structure("signature: E/2\nE(1,2)\nE(2,3)\nE(3,1)\n", false).unwrap();
        let j = gyo_join_tree(&c).unwrap();
        assert_eq!(hom_bruteforce(&c, &a).unwrap(), BigUint::from(3u32));
        assert_eq!(hom_acyclic(&c, &j, &a).unwrap(), BigUint::from(3u32));
        assert_eq!(hom_multigraph(&jtrep(&c, &j), &grep(&a)).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn repeated_entries_need_loops() {
        let c = parse_structure("signature: R/2\nR(x,x)\n", false).unwrap();
        let a = parse_structure("signature: R/2\nR(1,2)\n", false).unwrap();
        let j = gyo_join_tree(&c).unwrap();
        assert_eq!(hom_bruteforce(&c, &a).unwrap(), BigUint::zero());
        assert_eq!(hom_multigraph(&jtrep(&c, &j), &grep(&a)).unwrap(), BigUint::zero());
    }

    #[test]
    fn guard_rejects_large_spaces() {
        let c = parse_structure("signature: E/2\nE(a,b)\nE(c,d)\nE(e,f)\nE(g,h)\nE(i,j)\nE(k,l)\n", false).unwrap();
        let mut src = String::from("signature: E/2\n");
        for i in 0..200 {
            src.push_str(&format!("E({i},{})\n", i + 1));
        }
        let a = parse_structure(&src, false).unwrap();
        assert!(matches!(hom_bruteforce(&c, &a), Err(HomError::TooLarge(_))));
    }

    #[test]
    fn cyclic_source_graph_rejected() {
        let c = parse_structure("signature: E/2\nE(1,2)\nE(2,3)\nE(3,1)\n", false).unwrap();
        assert_eq!(hom_multigraph(&grep(&c), &grep(&c)), Err(HomError::NotMultitree));
    }
}
