//! Acyclic structures: GYO reduction, join trees and prints.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use rand::Rng;

use crate::structure::{Elem, RelId, Signature, Structure, StructureError, TupId, TupleRef};
use crate::types::SimType;

/// A join tree on `Tup(C)`, given by its edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinTree {
    nodes: usize,
    edges: Vec<(TupId, TupId)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AcyclicError {
    #[error("join tree has {found} nodes, structure has {expected} tuples")]
    NodeCount { expected: usize, found: usize },
    #[error("join tree edge refers to a missing tuple")]
    BadNode,
    #[error("join tree is not a tree")]
    NotATree,
    #[error("tuples containing element `{0}` are not connected in the join tree")]
    Disconnected(String),
    #[error("inconsistent print: {0}")]
    InconsistentPrint(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

impl JoinTree {
    pub fn new(nodes: usize, edges: Vec<(TupId, TupId)>) -> Self {
        JoinTree { nodes, edges }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[(TupId, TupId)] {
        &self.edges
    }

    pub fn adjacency(&self) -> Vec<Vec<TupId>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &(x, y) in &self.edges {
            adj[x.index()].push(y);
            adj[y.index()].push(x);
        }
        adj
    }

    /// Parent pointers and a BFS order from `root`.
    pub fn rooted(&self, root: TupId) -> (Vec<Option<TupId>>, Vec<TupId>) {
        let adj = self.adjacency();
        let mut parent = vec![None; self.nodes];
        let mut seen = vec![false; self.nodes];
        let mut order = Vec::with_capacity(self.nodes);
        let mut queue = VecDeque::from([root]);
        seen[root.index()] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v.index()] {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    parent[w.index()] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        (parent, order)
    }

    /// `edge: (R,i) -- (S,j)` lines; tuples are named by their first
    /// occurrence.
    pub fn to_text(&self, c: &Structure) -> String {
        let name = |t: TupId| {
            let r = c.tup(t).occurrences[0];
            format!("({},{})", c.signature().name(r.rel), r.index)
        };
        let mut out = String::new();
        for &(x, y) in &self.edges {
            let _ = writeln!(out, "edge: {} -- {}", name(x), name(y));
        }
        out
    }

    pub fn to_dot(&self, c: &Structure) -> String {
        let mut out = String::from("graph J {\n");
        for t in c.tup_ids() {
            let names: Vec<&str> = c.tup(t).elems.iter().map(|&e| c.elem_name(e)).collect();
            let rel = c.signature().name(c.tup(t).atp[0]);
            let _ = writeln!(out, "  t{} [label=\"{}({})\"];", t.0, rel, names.join(",").replace('"', "\\\""));
        }
        for &(x, y) in &self.edges {
            let _ = writeln!(out, "  t{} -- t{};", x.0, y.0);
        }
        out.push_str("}\n");
        out
    }
}

pub fn parse_join_tree(c: &Structure, src: &str) -> Result<JoinTree, AcyclicError> {
    let mut edges = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |m: &str| AcyclicError::Parse { line: line_no, message: m.to_string() };
        let rest = line.strip_prefix("edge:").ok_or_else(|| perr("expected `edge:`"))?;
        let (l, r) = rest.split_once("--").ok_or_else(|| perr("expected `--`"))?;
        let node = |s: &str| -> Result<TupId, AcyclicError> {
            let s = s.trim().strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(|| perr("expected `(rel,idx)`"))?;
            let (rel, idx) = s.split_once(',').ok_or_else(|| perr("expected `(rel,idx)`"))?;
            let rel = c.signature().lookup(rel.trim()).ok_or_else(|| perr("unknown relation"))?;
            let index: usize = idx.trim().parse().map_err(|_| perr("bad tuple index"))?;
            c.tup_of(TupleRef { rel, index }).ok_or_else(|| perr("tuple index out of range"))
        };
        edges.push((node(l)?, node(r)?));
    }
    Ok(JoinTree { nodes: c.size(), edges })
}

/// GYO reduction. Repeatedly removes the smallest-id ear, attaching it to the
/// smallest-id tuple that covers its shared elements. Returns `None` when the
/// structure is cyclic.
pub fn gyo_join_tree(c: &Structure) -> Option<JoinTree> {
    let n = c.size();
    let idx = c.element_index();
    let mut alive = vec![true; n];
    let mut occ: Vec<usize> = idx.iter().map(Vec::len).collect();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut found = None;
        'ears: for e in 0..n {
            if !alive[e] {
                continue;
            }
            let elems = &c.tuples()[e].elems;
            let shared: Vec<Elem> = elems.iter().copied().filter(|&x| occ[x as usize] > 1).collect();
            let candidates: Box<dyn Iterator<Item = usize>> = match shared.first() {
                Some(&x) => Box::new(idx[x as usize].iter().map(|t| t.index())),
                None => Box::new(0..n),
            };
            for f in candidates {
                if f != e && alive[f] && shared.iter().all(|x| c.tuples()[f].elems.contains(x)) {
                    found = Some((e, f));
                    break 'ears;
                }
            }
        }
        let (e, f) = found?;
        alive[e] = false;
        let mut elems = c.tuples()[e].elems.clone();
        elems.sort_unstable();
        elems.dedup();
        for x in elems {
            occ[x as usize] -= 1;
        }
        edges.push((TupId(e as u32), TupId(f as u32)));
    }
    Some(JoinTree { nodes: n, edges })
}

pub fn validate_join_tree(c: &Structure, j: &JoinTree) -> Result<(), AcyclicError> {
    let n = c.size();
    if j.nodes != n {
        return Err(AcyclicError::NodeCount { expected: n, found: j.nodes });
    }
    if j.edges.iter().any(|&(x, y)| x.index() >= n || y.index() >= n) {
        return Err(AcyclicError::BadNode);
    }
    if n > 0 && j.edges.len() != n - 1 {
        return Err(AcyclicError::NotATree);
    }
    if n > 0 {
        let (_, order) = j.rooted(TupId(0));
        if order.len() != n {
            return Err(AcyclicError::NotATree);
        }
    }
    let mut nodes_with = vec![0usize; c.universe_size()];
    for t in c.tuples() {
        let mut s = t.elems.clone();
        s.sort_unstable();
        s.dedup();
        for e in s {
            nodes_with[e as usize] += 1;
        }
    }
    let mut edges_with = vec![0usize; c.universe_size()];
    for &(x, y) in &j.edges {
        let mut s = c.tup(x).elems.clone();
        s.sort_unstable();
        s.dedup();
        for e in s {
            if c.tup(y).elems.contains(&e) {
                edges_with[e as usize] += 1;
            }
        }
    }
    for e in 0..c.universe_size() {
        if edges_with[e] + 1 != nodes_with[e] {
            return Err(AcyclicError::Disconnected(c.elem_name(e as Elem).to_string()));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrintNode {
    pub atp: Vec<RelId>,
    /// `τ_v`; its arity is `k_v`.
    pub stp: SimType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrintEdge {
    pub u: usize,
    pub v: usize,
    /// `stp(t_u, t_v)`.
    pub stp: SimType,
}

/// The print of a tree-shaped structure: atomic and similarity types per
/// node, similarity types per edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Print {
    pub nodes: Vec<PrintNode>,
    pub edges: Vec<PrintEdge>,
}

pub fn extract_print(c: &Structure, j: &JoinTree) -> Print {
    let nodes = c
        .tuples()
        .iter()
        .map(|t| PrintNode { atp: t.atp.clone(), stp: SimType::diag(&t.elems) })
        .collect();
    let edges = j
        .edges
        .iter()
        .map(|&(x, y)| PrintEdge { u: x.index(), v: y.index(), stp: SimType::of(&c.tup(x).elems, &c.tup(y).elems) })
        .collect();
    Print { nodes, edges }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// Builds a structure realizing `p`, processing the tree top-down from
/// `root`. Entries are copied from the parent along the edge type, remaining
/// slots are merged by the node's own type and filled with fresh elements.
/// The result is checked against every node and edge type. Returns the
/// structure together with the join tree induced by `p`.
pub fn structure_from_print(sig: &Signature, p: &Print, root: usize) -> Result<(Structure, JoinTree), AcyclicError> {
    let bad = |m: String| AcyclicError::InconsistentPrint(m);
    let n = p.nodes.len();
    if n == 0 {
        let s = Structure::new(sig.clone(), Vec::new(), vec![Vec::new(); sig.len()])?;
        return Ok((s, JoinTree::new(0, Vec::new())));
    }
    if root >= n || p.edges.len() + 1 != n {
        return Err(bad("not a tree".into()));
    }
    let mut adj: Vec<Vec<(usize, SimType)>> = vec![Vec::new(); n];
    for e in &p.edges {
        if e.u >= n || e.v >= n {
            return Err(bad("edge endpoint out of range".into()));
        }
        adj[e.u].push((e.v, e.stp));
        adj[e.v].push((e.u, e.stp.transpose()));
    }
    for (v, node) in p.nodes.iter().enumerate() {
        let (k, l) = node.stp.arities();
        if k != l || k == 0 {
            return Err(bad(format!("node {v} has a non-square type")));
        }
        if node.atp.is_empty() {
            return Err(bad(format!("node {v} has an empty atomic type")));
        }
        if let Some(&r) = node.atp.iter().find(|&&r| r.index() >= sig.len() || sig.arity(r) != k) {
            return Err(bad(format!("node {v}: relation {} does not have arity {k}", r.0)));
        }
    }

    let mut names: Vec<String> = Vec::new();
    let mut per_depth: Vec<usize> = Vec::new();
    let mut fresh = |depth: usize, names: &mut Vec<String>| -> Elem {
        if per_depth.len() <= depth {
            per_depth.resize(depth + 1, 0);
        }
        names.push(format!("x{}_{}", depth, per_depth[depth]));
        per_depth[depth] += 1;
        (names.len() - 1) as Elem
    };
    let mut tuples: Vec<Option<Vec<Elem>>> = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut queue = VecDeque::from([(root, None::<(usize, SimType)>)]);
    let mut seen = vec![false; n];
    seen[root] = true;
    while let Some((v, from)) = queue.pop_front() {
        let tau = p.nodes[v].stp;
        let k = tau.arities().0;
        let mut slots: Vec<Option<Elem>> = vec![None; k];
        if let Some((parent, edge)) = from {
            let tp = tuples[parent].as_ref().expect("parent built");
            if edge.arities() != (tp.len(), k) {
                return Err(bad(format!("edge type into node {v} has the wrong arity")));
            }
            for (i, j) in edge.pairs() {
                match slots[j] {
                    Some(x) if x != tp[i] => return Err(bad(format!("node {v}: position {} copied twice", j + 1))),
                    _ => slots[j] = Some(tp[i]),
                }
            }
        }
        let mut uf: Vec<usize> = (0..k).collect();
        for (i, j) in tau.pairs() {
            let (a, b) = (find(&mut uf, i), find(&mut uf, j));
            uf[a] = b;
        }
        let mut class_value: HashMap<usize, Elem> = HashMap::new();
        for (j, slot) in slots.iter().enumerate().take(k) {
            if let Some(x) = *slot {
                let r = find(&mut uf, j);
                if *class_value.entry(r).or_insert(x) != x {
                    return Err(bad(format!("node {v}: merged positions copy different elements")));
                }
            }
        }
        let mut t = Vec::with_capacity(k);
        for j in 0..k {
            let r = find(&mut uf, j);
            let x = match class_value.get(&r) {
                Some(&x) => x,
                None => {
                    let x = fresh(depth[v], &mut names);
                    class_value.insert(r, x);
                    x
                }
            };
            t.push(x);
        }
        if SimType::diag(&t) != tau {
            return Err(bad(format!("node {v}: similarity type not realizable")));
        }
        if let Some((parent, edge)) = from {
            if SimType::of(tuples[parent].as_ref().expect("parent built"), &t) != edge {
                return Err(bad(format!("edge into node {v}: similarity type not realizable")));
            }
        }
        tuples[v] = Some(t);
        for &(w, edge) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                depth[w] = depth[v] + 1;
                queue.push_back((w, Some((v, edge))));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(bad("print is not connected".into()));
    }
    let tuples: Vec<Vec<Elem>> = tuples.into_iter().map(|t| t.expect("all built")).collect();
    let mut relations = vec![Vec::new(); sig.len()];
    for (v, t) in tuples.iter().enumerate() {
        for r in &p.nodes[v].atp {
            relations[r.index()].push(t.clone());
        }
    }
    let s = Structure::new(sig.clone(), names, relations)?;
    if s.size() != n {
        return Err(bad("two nodes realize the same tuple".into()));
    }
    let id = |v: usize| s.tup_id(&tuples[v]).expect("tuple present");
    let edges = p.edges.iter().map(|e| (id(e.u), id(e.v))).collect();
    Ok((s, JoinTree::new(n, edges)))
}

/// Random connected acyclic structure with up to `nodes` tuples. Each new
/// tuple shares at least one element with a random earlier tuple and
/// otherwise uses fresh elements. The result is materialized from its print.
/// Fewer tuples come back only when no new one fits, as with a purely unary
/// signature.
pub fn random_acyclic<R: Rng>(sig: &Signature, nodes: usize, rng: &mut R) -> (Structure, JoinTree) {
    assert!(nodes >= 1);
    let rels: Vec<RelId> = sig.rel_ids().collect();
    let mut next_elem: Elem = 0;
    let mut tuples: Vec<Vec<Elem>> = Vec::new();
    let mut atps: Vec<Vec<RelId>> = Vec::new();
    let mut tree: Vec<(usize, usize)> = Vec::new();
    let mut seen: HashMap<Vec<Elem>, ()> = HashMap::new();
    let mut attempts = 0;
    while tuples.len() < nodes && attempts < 1_000 * nodes {
        attempts += 1;
        let rel = rels[rng.gen_range(0..rels.len())];
        let k = sig.arity(rel);
        let parent = if tuples.is_empty() { None } else { Some(rng.gen_range(0..tuples.len())) };
        let mut t: Vec<Elem> = Vec::with_capacity(k);
        for j in 0..k {
            let roll: f64 = rng.gen();
            let x = match parent {
                Some(p) if roll < 0.45 => tuples[p][rng.gen_range(0..tuples[p].len())],
                _ if j > 0 && roll < 0.6 => t[rng.gen_range(0..j)],
                _ => {
                    next_elem += 1;
                    next_elem - 1
                }
            };
            t.push(x);
        }
        if let Some(p) = parent {
            if !t.iter().any(|x| tuples[p].contains(x)) {
                let j = rng.gen_range(0..k);
                t[j] = tuples[p][rng.gen_range(0..tuples[p].len())];
            }
        }
        if seen.contains_key(&t) {
            continue;
        }
        seen.insert(t.clone(), ());
        let mut atp = vec![rel];
        for &other in &rels {
            if other != rel && sig.arity(other) == k && rng.gen_bool(0.2) {
                atp.push(other);
            }
        }
        atp.sort_unstable();
        if let Some(p) = parent {
            tree.push((p, tuples.len()));
        }
        tuples.push(t);
        atps.push(atp);
    }
    let print = Print {
        nodes: tuples
            .iter()
            .zip(&atps)
            .map(|(t, atp)| PrintNode { atp: atp.clone(), stp: SimType::diag(t) })
            .collect(),
        edges: tree
            .iter()
            .map(|&(u, v)| PrintEdge { u, v, stp: SimType::of(&tuples[u], &tuples[v]) })
            .collect(),
    };
    structure_from_print(sig, &print, 0).expect("print of a realized structure")
}
