//! Graph encodings of relational structures.

use std::collections::HashMap;

use crate::acyclic::JoinTree;
use crate::multigraph::{ColoredMultigraph, LabelRegistry, MultigraphBuilder};
use crate::slices::slices;
use crate::structure::{Elem, Signature, Structure};
use crate::types::SimType;

/// Labels `U_R` for every relation and `E_i,j` for `i, j ∈ [ar(σ)]`.
pub fn sigma_star(sig: &Signature) -> LabelRegistry {
    let unary = sig.symbols().iter().map(|s| format!("U_{}", s.name)).collect();
    let k = sig.max_arity();
    let mut binary = Vec::with_capacity(k * k);
    for i in 1..=k {
        for j in 1..=k {
            binary.push(format!("E_{i},{j}"));
        }
    }
    LabelRegistry::new(unary, binary)
}

fn pair_label(k: usize, i: usize, j: usize) -> u32 {
    (i * k + j) as u32
}

fn tuple_name(a: &Structure, t: &[Elem]) -> String {
    let names: Vec<&str> = t.iter().map(|&e| a.elem_name(e)).collect();
    format!("({})", names.join(","))
}

fn add_stp_edges(b: &mut MultigraphBuilder, k: usize, src: u32, dst: u32, stp: SimType) {
    for (i, j) in stp.pairs() {
        b.add_edge(src, dst, pair_label(k, i, j));
    }
}

/// Node ids of `grep` and `vgrep` coincide with `TupId` indices for the
/// tuple nodes.
pub fn grep(a: &Structure) -> ColoredMultigraph {
    let k = a.signature().max_arity();
    let mut b = MultigraphBuilder::new(sigma_star(a.signature()));
    for t in a.tuples() {
        b.add_node(format!("w{}", tuple_name(a, &t.elems)), t.atp.iter().map(|r| r.0).collect());
    }
    for (x, row) in a.overlaps().iter().enumerate() {
        for &(y, stp) in row {
            add_stp_edges(&mut b, k, x as u32, y.0, stp);
        }
    }
    b.finish()
}

/// The slice-based representation. Tuple nodes come first, then one node
/// per distinct slice in canonical order.
pub fn vgrep(a: &Structure) -> ColoredMultigraph {
    let k = a.signature().max_arity();
    let mut b = MultigraphBuilder::new(sigma_star(a.signature()));
    let n = a.size() as u32;
    for t in a.tuples() {
        b.add_node(format!("w{}", tuple_name(a, &t.elems)), t.atp.iter().map(|r| r.0).collect());
    }
    let per_tuple: Vec<Vec<Vec<Elem>>> = a.tuples().iter().map(|t| slices(&t.elems)).collect();
    let mut distinct: Vec<&Vec<Elem>> = per_tuple.iter().flatten().collect();
    distinct.sort_unstable_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    distinct.dedup();
    let mut ids: HashMap<&[Elem], u32> = HashMap::with_capacity(distinct.len());
    for (i, s) in distinct.iter().enumerate() {
        ids.insert(s.as_slice(), n + i as u32);
        b.add_node(format!("v{}", tuple_name(a, s)), Vec::new());
    }
    for (x, t) in a.tuples().iter().enumerate() {
        for s in &per_tuple[x] {
            let v = ids[s.as_slice()];
            let stp = SimType::of(&t.elems, s);
            add_stp_edges(&mut b, k, x as u32, v, stp);
            add_stp_edges(&mut b, k, v, x as u32, stp.transpose());
        }
    }
    b.finish()
}

/// Elements plus one node per `(R, a)` with `a ∈ R^A`; an edge `E` runs
/// from every entry of `a` to that node, which carries `U_R`.
pub fn incidence(a: &Structure) -> ColoredMultigraph {
    let unary = a.signature().symbols().iter().map(|s| format!("U_{}", s.name)).collect();
    let mut b = MultigraphBuilder::new(LabelRegistry::new(unary, vec!["E".into()]));
    for e in 0..a.universe_size() as Elem {
        b.add_node(a.elem_name(e).to_string(), Vec::new());
    }
    for rel in a.signature().rel_ids() {
        for t in a.relation(rel) {
            let v = b.add_node(format!("{}{}", a.signature().name(rel), tuple_name(a, t)), vec![rel.0]);
            for &e in t {
                b.add_edge(e, v, 0);
            }
        }
    }
    b.finish()
}

/// Elements only, with `E_R(i,j) = {(a_i, a_j) : a ∈ R, i ≠ j}`.
pub fn enriched_gaifman(a: &Structure) -> ColoredMultigraph {
    let sig = a.signature();
    let mut binary = Vec::new();
    let mut base = Vec::with_capacity(sig.len());
    for s in sig.symbols() {
        base.push(binary.len());
        for i in 1..=s.arity {
            for j in 1..=s.arity {
                if i != j {
                    binary.push(format!("E_{}({},{})", s.name, i, j));
                }
            }
        }
    }
    let mut b = MultigraphBuilder::new(LabelRegistry::new(Vec::new(), binary));
    for e in 0..a.universe_size() as Elem {
        b.add_node(a.elem_name(e).to_string(), Vec::new());
    }
    for rel in sig.rel_ids() {
        let ar = sig.arity(rel);
        for t in a.relation(rel) {
            let mut label = base[rel.index()] as u32;
            for i in 0..ar {
                for j in 0..ar {
                    if i != j {
                        b.add_edge(t[i], t[j], label);
                        label += 1;
                    }
                }
            }
        }
    }
    b.finish()
}

/// Elements plus one node `w_R(a)` per `(R, a)`, with `E_i = {(a_i, w_R(a))}`.
/// Tuple nodes carry no relation label.
pub fn enriched_incidence(a: &Structure) -> ColoredMultigraph {
    let sig = a.signature();
    let binary = (1..=sig.max_arity()).map(|i| format!("E_{i}")).collect();
    let mut b = MultigraphBuilder::new(LabelRegistry::new(Vec::new(), binary));
    for e in 0..a.universe_size() as Elem {
        b.add_node(a.elem_name(e).to_string(), Vec::new());
    }
    for rel in sig.rel_ids() {
        for t in a.relation(rel) {
            let v = b.add_node(format!("w_{}{}", sig.name(rel), tuple_name(a, t)), Vec::new());
            for (i, &e) in t.iter().enumerate() {
                b.add_edge(e, v, i as u32);
            }
        }
    }
    b.finish()
}

/// Join-tree representation of an acyclic structure: one node per tuple,
/// `E_i,j` edges along join-tree edges, plus loops `E_i,j` for
/// `(i, j) ∈ stp(c)` so that repeated entries inside a tuple are kept.
pub fn jtrep(c: &Structure, j: &JoinTree) -> ColoredMultigraph {
    let k = c.signature().max_arity();
    let mut b = MultigraphBuilder::new(sigma_star(c.signature()));
    for t in c.tuples() {
        let v = b.add_node(format!("v{}", tuple_name(c, &t.elems)), t.atp.iter().map(|r| r.0).collect());
        add_stp_edges(&mut b, k, v, v, SimType::diag(&t.elems));
    }
    for &(x, y) in j.edges() {
        let stp = SimType::of(&c.tup(x).elems, &c.tup(y).elems);
        add_stp_edges(&mut b, k, x.0, y.0, stp);
        add_stp_edges(&mut b, k, y.0, x.0, stp.transpose());
    }
    b.finish()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Grep,
    Vgrep,
    Incidence,
    EnrichedGaifman,
    EnrichedIncidence,
}

impl Representation {
    pub fn build(self, a: &Structure) -> ColoredMultigraph {
        match self {
            Representation::Grep => grep(a),
            Representation::Vgrep => vgrep(a),
            Representation::Incidence => incidence(a),
            Representation::EnrichedGaifman => enriched_gaifman(a),
            Representation::EnrichedIncidence => enriched_incidence(a),
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "grep" => Representation::Grep,
            "vgrep" => Representation::Vgrep,
            "incidence" => Representation::Incidence,
            "enriched-gaifman" => Representation::EnrichedGaifman,
            "enriched-incidence" => Representation::EnrichedIncidence,
            other => return Err(format!("unknown representation `{other}`")),
        })
    }
}
