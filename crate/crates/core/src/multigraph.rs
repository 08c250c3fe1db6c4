//! Vertex- and edge-labeled directed multigraphs.
//!
//! Nodes carry sets of unary labels; each binary label is a set of directed
//! edges, loops allowed. Label names live in a registry shared by graphs that
//! are meant to be compared.

use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelRegistry {
    unary: Vec<String>,
    binary: Vec<String>,
}

impl LabelRegistry {
    pub fn new(unary: Vec<String>, binary: Vec<String>) -> Self {
        LabelRegistry { unary, binary }
    }

    pub fn unary(&self) -> &[String] {
        &self.unary
    }

    pub fn binary(&self) -> &[String] {
        &self.binary
    }

    pub fn unary_id(&self, name: &str) -> Option<u32> {
        self.unary.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn binary_id(&self, name: &str) -> Option<u32> {
        self.binary.iter().position(|n| n == name).map(|i| i as u32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    pub label: u32,
}

#[derive(Clone, Debug)]
pub struct ColoredMultigraph {
    registry: LabelRegistry,
    names: Vec<String>,
    node_labels: Vec<Vec<u32>>,
    /// Sorted by `(src, dst, label)`, deduplicated.
    edges: Vec<Edge>,
}

impl ColoredMultigraph {
    pub fn registry(&self) -> &LabelRegistry {
        &self.registry
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn name(&self, v: u32) -> &str {
        &self.names[v as usize]
    }

    /// Sorted unary label ids of `v`.
    pub fn labels(&self, v: u32) -> &[u32] {
        &self.node_labels[v as usize]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_edge(&self, src: u32, dst: u32, label: u32) -> bool {
        self.edges.binary_search(&Edge { src, dst, label }).is_ok()
    }

    /// Edge labels on `(src, dst)`, sorted.
    pub fn edge_labels(&self, src: u32, dst: u32) -> &[Edge] {
        let lo = self.edges.partition_point(|e| (e.src, e.dst) < (src, dst));
        let hi = self.edges.partition_point(|e| (e.src, e.dst) <= (src, dst));
        &self.edges[lo..hi]
    }

    /// Undirected neighbor lists without loops, each sorted and deduplicated.
    pub fn neighbor_lists(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            if e.src != e.dst {
                adj[e.src as usize].push(e.dst);
                adj[e.dst as usize].push(e.src);
            }
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        adj
    }

    /// Disjoint union; nodes of `other` are shifted by `self.node_count()`.
    /// Returns `None` when the label registries differ.
    pub fn disjoint_union(&self, other: &ColoredMultigraph) -> Option<ColoredMultigraph> {
        if self.registry != other.registry {
            return None;
        }
        let off = self.node_count() as u32;
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let mut node_labels = self.node_labels.clone();
        node_labels.extend(other.node_labels.iter().cloned());
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| Edge { src: e.src + off, dst: e.dst + off, label: e.label }));
        Some(ColoredMultigraph { registry: self.registry.clone(), names, node_labels, edges })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n");
        for v in 0..self.node_count() {
            let labels: Vec<&str> = self.node_labels[v].iter().map(|&l| self.registry.unary[l as usize].as_str()).collect();
            let mut text = escape(&self.names[v]);
            if !labels.is_empty() {
                text.push_str("\\n");
                text.push_str(&escape(&labels.join(" ")));
            }
            let _ = writeln!(out, "  n{v} [label=\"{text}\"];");
        }
        let mut i = 0;
        while i < self.edges.len() {
            let e = self.edges[i];
            let mut j = i;
            let mut labels = Vec::new();
            while j < self.edges.len() && (self.edges[j].src, self.edges[j].dst) == (e.src, e.dst) {
                labels.push(self.registry.binary[self.edges[j].label as usize].as_str());
                j += 1;
            }
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.src, e.dst, escape(&labels.join(" ")));
            i = j;
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Clone, Debug)]
pub struct MultigraphBuilder {
    registry: LabelRegistry,
    names: Vec<String>,
    node_labels: Vec<Vec<u32>>,
    edges: Vec<Edge>,
    unary_ids: HashMap<String, u32>,
    binary_ids: HashMap<String, u32>,
}

impl MultigraphBuilder {
    pub fn new(registry: LabelRegistry) -> Self {
        let unary_ids = registry.unary.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        let binary_ids = registry.binary.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        MultigraphBuilder { registry, names: Vec::new(), node_labels: Vec::new(), edges: Vec::new(), unary_ids, binary_ids }
    }

    pub fn registry(&self) -> &LabelRegistry {
        &self.registry
    }

    pub fn unary_id(&self, name: &str) -> u32 {
        *self.unary_ids.get(name).unwrap_or_else(|| panic!("unary label `{name}` not registered"))
    }

    pub fn binary_id(&self, name: &str) -> u32 {
        *self.binary_ids.get(name).unwrap_or_else(|| panic!("binary label `{name}` not registered"))
    }

    pub fn add_node(&mut self, name: String, mut labels: Vec<u32>) -> u32 {
        labels.sort_unstable();
        labels.dedup();
        self.names.push(name);
        self.node_labels.push(labels);
        (self.names.len() - 1) as u32
    }

    pub fn add_edge(&mut self, src: u32, dst: u32, label: u32) {
        self.edges.push(Edge { src, dst, label });
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn finish(mut self) -> ColoredMultigraph {
        self.edges.sort_unstable();
        self.edges.dedup();
        ColoredMultigraph { registry: self.registry, names: self.names, node_labels: self.node_labels, edges: self.edges }
    }
}
