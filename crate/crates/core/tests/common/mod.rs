//! Brute-force oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use relcr::cr::canonical_partition;
use relcr::gen::{random_signature, random_structure};
use relcr::multigraph::ColoredMultigraph;
use relcr::structure::{Elem, Signature, Structure, StructureBuilder};


/// Outgoing labels, incoming labels and color of one neighbor.
type Lambda = (Vec<u32>, Vec<u32>, u32);
/// Textbook color refinement with full signatures every round: the
/// partitions of rounds `0..=stable`, where `stable + 1` splits nothing.
pub fn naive_cr(g: &ColoredMultigraph) -> Vec<Vec<u32>> {
    let n = g.node_count();
    let mut fwd: Vec<BTreeMap<u32, Vec<u32>>> = vec![BTreeMap::new(); n];
    let mut back: Vec<BTreeMap<u32, Vec<u32>>> = vec![BTreeMap::new(); n];
    let mut loops: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in g.edges() {
        if e.src == e.dst {
            loops[e.src as usize].push(e.label);
        } else {
            fwd[e.src as usize].entry(e.dst).or_default().push(e.label);
            back[e.dst as usize].entry(e.src).or_default().push(e.label);
        }
    }
    let init: Vec<(Vec<u32>, Vec<u32>)> = (0..n).map(|v| (g.labels(v as u32).to_vec(), sorted(loops[v].clone()))).collect();
    let mut colors = relabel(&init);
    let mut out = vec![colors.clone()];
    loop {
        let sigs: Vec<(u32, Vec<Lambda>)> = (0..n)
            .map(|v| {
                let mut nb: HashSet<u32> = fwd[v].keys().copied().collect();
                nb.extend(back[v].keys().copied());
                let mut m: Vec<Lambda> = nb
                    .into_iter()
                    .map(|w| {
                        let f = fwd[v].get(&w).cloned().unwrap_or_default();
                        let b = back[v].get(&w).cloned().unwrap_or_default();
                        (sorted(f), sorted(b), colors[w as usize])
                    })
                    .collect();
                m.sort();
                (colors[v], m)
            })
            .collect();
        let next = relabel(&sigs);
        if class_count(&next) == class_count(&colors) {
            return out;
        }
        colors = next;
        out.push(colors.clone());
    }
}

fn sorted(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v
}

fn relabel<T: Ord + Clone + std::hash::Hash>(keys: &[T]) -> Vec<u32> {
    let mut distinct: Vec<T> = keys.to_vec();
    distinct.sort();
    distinct.dedup();
    keys.iter().map(|k| distinct.binary_search(k).expect("present") as u32).collect()
}

pub fn class_count(c: &[u32]) -> usize {
    c.iter().collect::<HashSet<_>>().len()
}

/// Textbook CR on a simple undirected graph given by adjacency lists; the
/// stable partition.
pub fn graph_cr(adj: &[Vec<usize>]) -> Vec<u32> {
    let mut colors = vec![0u32; adj.len()];
    loop {
        let sigs: Vec<(u32, Vec<u32>)> = adj
            .iter()
            .enumerate()
            .map(|(v, ns)| (colors[v], sorted(ns.iter().map(|&w| colors[w]).collect())))
            .collect();
        let next = relabel(&sigs);
        if class_count(&next) == class_count(&colors) {
            return canonical_partition(colors);
        }
        colors = next;
    }
}

/// Equal as partitions, ignoring color names.
pub fn same_partition(a: &[u32], b: &[u32]) -> bool {
    a.len() == b.len() && canonical_partition(a.iter().copied()) == canonical_partition(b.iter().copied())
}

pub fn partition_of<T: Ord + Clone + std::hash::Hash>(xs: &[T]) -> Vec<u32> {
    canonical_partition(relabel(xs))
}

/// A random structure with at most `max_tuples` facts and arity at most
/// `max_arity`.
pub fn small_structure<R: Rng>(rng: &mut R, max_rels: usize, max_arity: usize, max_tuples: usize) -> Structure {
    let sig = random_signature(rng.gen_range(1..=max_rels), max_arity, rng);
    let facts = rng.gen_range(1..=max_tuples);
    let universe = rng.gen_range(1..=facts * max_arity);
    random_structure(&sig, universe, facts, 0.2, rng)
}

/// A random structure over `sig` with the same number of tuples of each
/// atomic type as `a`. Tuple shapes and overlaps are redrawn.
pub fn strict_size_twin<R: Rng>(a: &Structure, rng: &mut R) -> Structure {
    let universe = a.universe_size().max(2);
    loop {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut b = StructureBuilder::new(a.signature().clone());
        let mut ok = true;
        for t in a.tuples() {
            let mut v: Vec<usize> = Vec::with_capacity(t.elems.len());
            for j in 0..t.elems.len() {
                let x = if j > 0 && rng.gen_bool(0.2) { v[rng.gen_range(0..j)] } else { rng.gen_range(0..universe) };
                v.push(x);
            }
            if !seen.insert(v.clone()) {
                ok = false;
                break;
            }
            let ids: Vec<Elem> = v.iter().map(|x| b.elem(&x.to_string())).collect();
            for &r in &t.atp {
                b.fact_ids(r, ids.clone()).expect("arity matches");
            }
        }
        if ok {
            return b.build(false).expect("covered");
        }
    }
}

/// Simple undirected graph as a `{E/2, U/1}` structure: `E` symmetric,
/// `U` holding every vertex.
pub fn graph_structure(adj: &[Vec<usize>]) -> Structure {
    let sig = Signature::new([("E", 2), ("U", 1)]).expect("valid");
    let mut b = StructureBuilder::new(sig);
    for v in 0..adj.len() {
        b.fact("U", &[&v.to_string()]).expect("valid");
    }
    for (v, ns) in adj.iter().enumerate() {
        for &w in ns {
            b.fact("E", &[&v.to_string(), &w.to_string()]).expect("valid");
        }
    }
    b.build(false).expect("U covers all vertices")
}

pub fn random_graph<R: Rng>(rng: &mut R, max_n: usize) -> Vec<Vec<usize>> {
    let n = rng.gen_range(1..=max_n);
    let p: f64 = rng.gen_range(0.05..0.5);
    let mut adj = vec![Vec::new(); n];
    for v in 0..n {
        for w in v + 1..n {
            if rng.gen_bool(p) {
                adj[v].push(w);
                adj[w].push(v);
            }
        }
    }
    adj
}

/// `Tup(A)` partition induced by an RCR round.
pub fn rcr_partition(run: &relcr::RcrRun, round: usize) -> Vec<u32> {
    canonical_partition(run.round(round).iter().map(|c| c.0))
}

pub fn fixture(name: &str) -> Structure {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    relcr::parse::parse_structure(&src, false).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn histogram<K: Ord + Clone>(xs: impl IntoIterator<Item = K>) -> BTreeMap<K, usize> {
    let mut h = BTreeMap::new();
    for x in xs {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

pub type Assignment = HashMap<relcr::logic::Var, Elem>;
