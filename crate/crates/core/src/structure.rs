//! Finite relational structures over a fixed signature.
//!
//! Elements are dense `u32` ids assigned in first-occurrence order; their
//! textual names live in a side table. `Tup(A)` is the set of distinct tuple
//! vectors across all relations, each carrying its atomic type.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::types::SimType;

pub type Elem = u32;

/// Largest supported arity. Similarity types are stored as 8x8 bit masks.
pub const MAX_ARITY: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelId(pub u32);

impl RelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index into `Tup(A)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupId(pub u32);

impl TupId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A tuple addressed by relation and position inside that relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleRef {
    pub rel: RelId,
    pub index: usize,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("signature has no symbols")]
    EmptySignature,
    #[error("duplicate relation symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("relation `{0}` has arity 0")]
    ZeroArity(String),
    #[error("relation `{name}` has arity {arity}, maximum supported is {MAX_ARITY}")]
    ArityTooLarge { name: String, arity: usize },
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("relation `{name}` expects {expected} arguments, got {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("element `{0}` does not occur in any tuple")]
    UncoveredElement(String),
    #[error("element id {0} is out of range")]
    ElementOutOfRange(Elem),
    #[error("signatures differ")]
    SignatureMismatch,
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, RelId>,
}

impl Signature {
    pub fn new<S: Into<String>>(
        symbols: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Self, StructureError> {
        let mut out = Signature { symbols: Vec::new(), by_name: HashMap::new() };
        for (name, arity) in symbols {
            let name = name.into();
            if arity == 0 {
                return Err(StructureError::ZeroArity(name));
            }
            if arity > MAX_ARITY {
                return Err(StructureError::ArityTooLarge { name, arity });
            }
            if out.by_name.contains_key(&name) {
                return Err(StructureError::DuplicateSymbol(name));
            }
            out.by_name.insert(name.clone(), RelId(out.symbols.len() as u32));
            out.symbols.push(Symbol { name, arity });
        }
        if out.symbols.is_empty() {
            return Err(StructureError::EmptySignature);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn rel_ids(&self) -> impl Iterator<Item = RelId> {
        (0..self.symbols.len() as u32).map(RelId)
    }

    pub fn lookup(&self, name: &str) -> Option<RelId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, rel: RelId) -> &str {
        &self.symbols[rel.index()].name
    }

    pub fn arity(&self, rel: RelId) -> usize {
        self.symbols[rel.index()].arity
    }

    /// `ar(σ)`, the maximum arity.
    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}/{}", s.name, s.arity)?;
        }
        Ok(())
    }
}

/// One member of `Tup(A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tuple {
    pub elems: Vec<Elem>,
    /// Relations containing the vector, sorted.
    pub atp: Vec<RelId>,
    /// Every `(relation, index)` position holding this vector.
    pub occurrences: Vec<TupleRef>,
}

#[derive(Clone, Debug)]
pub struct Structure {
    sig: Signature,
    names: Vec<String>,
    relations: Vec<Vec<Vec<Elem>>>,
    tuples: Vec<Tuple>,
    lookup: HashMap<Vec<Elem>, TupId>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.sig == other.sig && self.names == other.names && self.relations == other.relations
    }
}

impl Eq for Structure {}

impl Structure {
    /// Builds a structure from raw relations. Duplicate tuples inside a
    /// relation are dropped; every element below `names.len()` must occur in
    /// some tuple.
    pub fn new(
        sig: Signature,
        names: Vec<String>,
        relations: Vec<Vec<Vec<Elem>>>,
    ) -> Result<Self, StructureError> {
        assert_eq!(relations.len(), sig.len(), "one tuple list per relation symbol");
        let n = names.len();
        let mut covered = vec![false; n];
        let mut rels = Vec::with_capacity(relations.len());
        for (r, tuples) in relations.into_iter().enumerate() {
            let rel = RelId(r as u32);
            let arity = sig.arity(rel);
            let mut seen = HashSet::with_capacity(tuples.len());
            let mut kept = Vec::with_capacity(tuples.len());
            for t in tuples {
                if t.len() != arity {
                    return Err(StructureError::ArityMismatch {
                        name: sig.name(rel).to_string(),
                        expected: arity,
                        found: t.len(),
                    });
                }
                for &e in &t {
                    if e as usize >= n {
                        return Err(StructureError::ElementOutOfRange(e));
                    }
                    covered[e as usize] = true;
                }
                if seen.insert(t.clone()) {
                    kept.push(t);
                }
            }
            rels.push(kept);
        }
        if let Some(e) = covered.iter().position(|c| !c) {
            return Err(StructureError::UncoveredElement(names[e].clone()));
        }

        let mut tuples: Vec<Tuple> = Vec::new();
        let mut lookup: HashMap<Vec<Elem>, TupId> = HashMap::new();
        for (r, rel_tuples) in rels.iter().enumerate() {
            let rel = RelId(r as u32);
            for (index, t) in rel_tuples.iter().enumerate() {
                let tref = TupleRef { rel, index };
                match lookup.get(t) {
                    Some(&id) => {
                        let entry = &mut tuples[id.index()];
                        entry.atp.push(rel);
                        entry.occurrences.push(tref);
                    }
                    None => {
                        lookup.insert(t.clone(), TupId(tuples.len() as u32));
                        tuples.push(Tuple { elems: t.clone(), atp: vec![rel], occurrences: vec![tref] });
                    }
                }
            }
        }
        Ok(Structure { sig, names, relations: rels, tuples, lookup })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn universe_size(&self) -> usize {
        self.names.len()
    }

    pub fn elem_name(&self, e: Elem) -> &str {
        &self.names[e as usize]
    }

    pub fn elem_names(&self) -> &[String] {
        &self.names
    }

    pub fn elem_by_name(&self, name: &str) -> Option<Elem> {
        self.names.iter().position(|n| n == name).map(|i| i as Elem)
    }

    pub fn relation(&self, rel: RelId) -> &[Vec<Elem>] {
        &self.relations[rel.index()]
    }

    pub fn relations(&self) -> &[Vec<Vec<Elem>>] {
        &self.relations
    }

    pub fn contains(&self, rel: RelId, t: &[Elem]) -> bool {
        self.atp(t).contains(&rel)
    }

    /// `|Tup(A)|`.
    pub fn size(&self) -> usize {
        self.tuples.len()
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn tup(&self, id: TupId) -> &Tuple {
        &self.tuples[id.index()]
    }

    pub fn tup_ids(&self) -> impl Iterator<Item = TupId> {
        (0..self.tuples.len() as u32).map(TupId)
    }

    pub fn tup_id(&self, t: &[Elem]) -> Option<TupId> {
        self.lookup.get(t).copied()
    }

    pub fn tup_of(&self, r: TupleRef) -> Option<TupId> {
        self.relations.get(r.rel.index())?.get(r.index).and_then(|t| self.tup_id(t))
    }

    /// `atp(A, t)`: the relations containing `t`, empty when `t ∉ Tup(A)`.
    pub fn atp(&self, t: &[Elem]) -> &[RelId] {
        match self.lookup.get(t) {
            Some(id) => &self.tuples[id.index()].atp,
            None => &[],
        }
    }

    /// Relation sizes `|R^A|` in signature order.
    pub fn relation_sizes(&self) -> Vec<usize> {
        self.relations.iter().map(Vec::len).collect()
    }

    /// For every element, the members of `Tup(A)` containing it.
    pub fn element_index(&self) -> Vec<Vec<TupId>> {
        let mut idx = vec![Vec::new(); self.names.len()];
        for (i, t) in self.tuples.iter().enumerate() {
            for &e in &t.elems {
                let list: &mut Vec<TupId> = &mut idx[e as usize];
                if list.last() != Some(&TupId(i as u32)) {
                    list.push(TupId(i as u32));
                }
            }
        }
        idx
    }

    /// For every tuple, the tuples it overlaps (itself included) with the
    /// corresponding similarity type.
    pub fn overlaps(&self) -> Vec<Vec<(TupId, SimType)>> {
        let idx = self.element_index();
        let mut stamp = vec![u32::MAX; self.tuples.len()];
        let mut out = Vec::with_capacity(self.tuples.len());
        for (i, t) in self.tuples.iter().enumerate() {
            let mut row = Vec::new();
            for &e in &t.elems {
                for &b in &idx[e as usize] {
                    if stamp[b.index()] != i as u32 {
                        stamp[b.index()] = i as u32;
                        row.push((b, SimType::of(&t.elems, &self.tuples[b.index()].elems)));
                    }
                }
            }
            row.sort_unstable_by_key(|&(b, _)| b);
            out.push(row);
        }
        out
    }

    /// Gaifman graph edges `{u, v}` with `u < v`, sorted.
    pub fn gaifman_edges(&self) -> Vec<(Elem, Elem)> {
        let mut edges = HashSet::new();
        for t in &self.tuples {
            for &u in &t.elems {
                for &v in &t.elems {
                    if u < v {
                        edges.insert((u, v));
                    }
                }
            }
        }
        let mut edges: Vec<_> = edges.into_iter().collect();
        edges.sort_unstable();
        edges
    }

    pub fn metrics(&self) -> Metrics {
        let cohesion = self.overlaps().iter().map(|row| row.len() - 1).sum();
        Metrics {
            size: self.size(),
            cohesion,
            universe: self.universe_size(),
            arity: self.sig.max_arity(),
        }
    }

    /// Tuple-count equality per relation (`A ≅_size B`).
    pub fn strict_size_eq(&self, other: &Structure) -> bool {
        self.sig == other.sig && self.relation_sizes() == other.relation_sizes()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Metrics {
    pub size: usize,
    pub cohesion: usize,
    pub universe: usize,
    pub arity: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

/// Bookkeeping for `A ⊎ B`: elements of `A` come first.
#[derive(Clone, Debug)]
pub struct DisjointUnion {
    pub structure: Structure,
    pub left_universe: usize,
}

impl DisjointUnion {
    pub fn elem_side(&self, e: Elem) -> Side {
        if (e as usize) < self.left_universe {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Maps a union element back to its side and local id.
    pub fn project(&self, e: Elem) -> (Side, Elem) {
        match self.elem_side(e) {
            Side::Left => (Side::Left, e),
            Side::Right => (Side::Right, e - self.left_universe as Elem),
        }
    }

    pub fn tup_side(&self, t: TupId) -> Side {
        self.elem_side(self.structure.tup(t).elems[0])
    }

    pub fn right_elem(&self, e: Elem) -> Elem {
        e + self.left_universe as Elem
    }
}

pub fn disjoint_union(a: &Structure, b: &Structure) -> Result<DisjointUnion, StructureError> {
    if a.sig != b.sig {
        return Err(StructureError::SignatureMismatch);
    }
    let off = a.universe_size() as Elem;
    let mut names = Vec::with_capacity(a.universe_size() + b.universe_size());
    names.extend(a.names.iter().map(|n| format!("A.{n}")));
    names.extend(b.names.iter().map(|n| format!("B.{n}")));
    let relations = a
        .relations
        .iter()
        .zip(&b.relations)
        .map(|(ra, rb)| {
            ra.iter()
                .cloned()
                .chain(rb.iter().map(|t| t.iter().map(|&e| e + off).collect()))
                .collect()
        })
        .collect();
    let structure = Structure::new(a.sig.clone(), names, relations)?;
    Ok(DisjointUnion { structure, left_universe: a.universe_size() })
}

/// Incremental construction by element name.
#[derive(Clone, Debug)]
pub struct StructureBuilder {
    sig: Signature,
    names: Vec<String>,
    ids: HashMap<String, Elem>,
    relations: Vec<Vec<Vec<Elem>>>,
}

impl StructureBuilder {
    pub fn new(sig: Signature) -> Self {
        let relations = vec![Vec::new(); sig.len()];
        StructureBuilder { sig, names: Vec::new(), ids: HashMap::new(), relations }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn elem(&mut self, name: &str) -> Elem {
        if let Some(&e) = self.ids.get(name) {
            return e;
        }
        let e = self.names.len() as Elem;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), e);
        e
    }

    pub fn fact(&mut self, rel: &str, args: &[&str]) -> Result<&mut Self, StructureError> {
        let r = self.sig.lookup(rel).ok_or_else(|| StructureError::UnknownSymbol(rel.to_string()))?;
        let t: Vec<Elem> = args.iter().map(|a| self.elem(a)).collect();
        self.fact_ids(r, t)?;
        Ok(self)
    }

    pub fn fact_ids(&mut self, rel: RelId, t: Vec<Elem>) -> Result<(), StructureError> {
        let arity = self.sig.arity(rel);
        if t.len() != arity {
            return Err(StructureError::ArityMismatch {
                name: self.sig.name(rel).to_string(),
                expected: arity,
                found: t.len(),
            });
        }
        self.relations[rel.index()].push(t);
        Ok(())
    }

    /// Finishes the structure. With `pad_universe`, a fresh unary relation
    /// holding every element is added so that no element is uncovered.
    pub fn build(self, pad_universe: bool) -> Result<Structure, StructureError> {
        let StructureBuilder { sig, names, relations, .. } = self;
        if !pad_universe {
            return Structure::new(sig, names, relations);
        }
        let mut pad = String::from("U");
        while sig.lookup(&pad).is_some() {
            pad.push('_');
        }
        let mut symbols: Vec<(String, usize)> =
            sig.symbols().iter().map(|s| (s.name.clone(), s.arity)).collect();
        symbols.push((pad, 1));
        let sig = Signature::new(symbols)?;
        let mut relations = relations;
        relations.push((0..names.len() as Elem).map(|e| vec![e]).collect());
        Structure::new(sig, names, relations)
    }
}
