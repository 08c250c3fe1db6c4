//! Color refinement on colored multigraphs.
//!
//! `γ_0(v)` is the pair (unary labels, loop labels). `γ_{i+1}(v)` adds the
//! multiset of `(λ(v, w), γ_i(w))` over Gaifman neighbors `w ≠ v`, where
//! `λ(v, w)` records the labels of edges `v → w` and `w → v` separately.
//!
//! The engine is round-synchronous but incremental: after round 1 only the
//! neighbors of nodes whose class changed are re-examined, and when a class
//! splits its largest part keeps the old id. A node therefore changes id at
//! most `log2 n` times, which bounds the total work by
//! `O((n + m) log(n + m))`. Class ids are partition labels: two nodes share
//! an id in round `i` exactly when their `γ_i` colors agree.

use std::collections::{BTreeMap, HashMap};

use crate::multigraph::ColoredMultigraph;

#[derive(Clone, Copy, Debug, Default)]
pub struct CrOptions {
    /// Stop after this many refinement rounds.
    pub max_rounds: Option<usize>,
    /// Keep the coloring of every round, not just the last one.
    pub trace: bool,
}

#[derive(Clone, Debug)]
pub struct CrRun {
    /// Per-round colorings when tracing, otherwise only the last one.
    rounds: Vec<Vec<u32>>,
    traced: bool,
    pub class_counts: Vec<usize>,
    /// Smallest `i` such that round `i + 1` did not split any class.
    pub stable_round: Option<usize>,
}

impl CrRun {
    pub fn final_colors(&self) -> &[u32] {
        self.rounds.last().expect("at least round 0")
    }

    pub fn computed_rounds(&self) -> usize {
        self.class_counts.len()
    }

    /// Coloring after `round` refinements. Rounds past the last computed one
    /// map to the last one, which is stable unless the cap was hit.
    pub fn colors(&self, round: usize) -> &[u32] {
        if !self.traced {
            assert!(
                round + 1 >= self.class_counts.len(),
                "round {round} not retained; run with trace enabled"
            );
            return self.final_colors();
        }
        &self.rounds[round.min(self.rounds.len() - 1)]
    }
}

struct Prepared {
    n: usize,
    initial: Vec<u32>,
    adj_start: Vec<usize>,
    /// `(neighbor, λ(v, neighbor), λ(neighbor, v))`.
    adj: Vec<(u32, u32, u32)>,
}

fn prepare(g: &ColoredMultigraph) -> Prepared {
    let n = g.node_count();
    let mut loops: Vec<Vec<u32>> = vec![Vec::new(); n];
    // Signed labels: 2L for an outgoing edge, 2L + 1 for an incoming one.
    let mut entries: Vec<(u32, u32, u32)> = Vec::with_capacity(2 * g.edge_count());
    for e in g.edges() {
        if e.src == e.dst {
            loops[e.src as usize].push(e.label);
        } else {
            entries.push((e.src, e.dst, 2 * e.label));
            entries.push((e.dst, e.src, 2 * e.label + 1));
        }
    }
    let mut init_ids: HashMap<(&[u32], Vec<u32>), u32> = HashMap::new();
    let mut initial = Vec::with_capacity(n);
    for (v, l) in loops.iter_mut().enumerate() {
        let key = (g.labels(v as u32), std::mem::take(l));
        let next = init_ids.len() as u32;
        initial.push(*init_ids.entry(key).or_insert(next));
    }

    entries.sort_unstable();
    let mut lambda_ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut lambda_sets: Vec<Vec<u32>> = Vec::new();
    let intern = |set: Vec<u32>, ids: &mut HashMap<Vec<u32>, u32>, sets: &mut Vec<Vec<u32>>| -> u32 {
        if let Some(&id) = ids.get(&set) {
            return id;
        }
        let id = sets.len() as u32;
        ids.insert(set.clone(), id);
        sets.push(set);
        id
    };
    let mut adj_start = vec![0usize; n + 1];
    let mut adj: Vec<(u32, u32, u32)> = Vec::new();
    let mut i = 0;
    while i < entries.len() {
        let (u, v, _) = entries[i];
        let mut j = i;
        let mut set = Vec::new();
        while j < entries.len() && entries[j].0 == u && entries[j].1 == v {
            set.push(entries[j].2);
            j += 1;
        }
        let rev: Vec<u32> = {
            let mut r: Vec<u32> = set.iter().map(|s| s ^ 1).collect();
            r.sort_unstable();
            r
        };
        let fwd = intern(set, &mut lambda_ids, &mut lambda_sets);
        let bwd = intern(rev, &mut lambda_ids, &mut lambda_sets);
        adj.push((v, fwd, bwd));
        adj_start[u as usize + 1] += 1;
        i = j;
    }
    for v in 0..n {
        adj_start[v + 1] += adj_start[v];
    }
    Prepared { n, initial, adj_start, adj }
}

struct Partition {
    color: Vec<u32>,
    members: Vec<Vec<u32>>,
    pos: Vec<u32>,
}

impl Partition {
    fn new(initial: Vec<u32>) -> Self {
        let classes = initial.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut members = vec![Vec::new(); classes];
        let mut pos = vec![0; initial.len()];
        for (v, &c) in initial.iter().enumerate() {
            pos[v] = members[c as usize].len() as u32;
            members[c as usize].push(v as u32);
        }
        Partition { color: initial, members, pos }
    }

    fn class_count(&self) -> usize {
        self.members.len()
    }

    fn new_class(&mut self) -> u32 {
        self.members.push(Vec::new());
        (self.members.len() - 1) as u32
    }

    fn move_to(&mut self, v: u32, to: u32) {
        let from = self.color[v as usize] as usize;
        let p = self.pos[v as usize] as usize;
        let list = &mut self.members[from];
        list.swap_remove(p);
        if p < list.len() {
            let moved = list[p];
            self.pos[moved as usize] = p as u32;
        }
        self.pos[v as usize] = self.members[to as usize].len() as u32;
        self.members[to as usize].push(v);
        self.color[v as usize] = to;
    }
}

/// Splits one class into its groups plus the `untouched` members outside
/// every group. Nodes that change class are appended to `moved`.
fn split_class(
    part: &mut Partition,
    class: u32,
    untouched: usize,
    groups: &[&[u32]],
    stamp: &[u32],
    round: u32,
    moved: &mut Vec<u32>,
) {
    if groups.is_empty() || (untouched == 0 && groups.len() == 1) {
        return;
    }
    // The largest part keeps the id; ties favour the untouched part, then the
    // first group.
    let mut keep: Option<usize> = None;
    let mut best = untouched;
    for (g, members) in groups.iter().enumerate() {
        if members.len() > best {
            best = members.len();
            keep = Some(g);
        }
    }
    if untouched > 0 && keep.is_some() {
        let rest: Vec<u32> =
            part.members[class as usize].iter().copied().filter(|&v| stamp[v as usize] != round).collect();
        let to = part.new_class();
        for v in rest {
            part.move_to(v, to);
            moved.push(v);
        }
    }
    for (g, members) in groups.iter().enumerate() {
        if Some(g) == keep {
            continue;
        }
        let to = part.new_class();
        for &v in members.iter() {
            part.move_to(v, to);
            moved.push(v);
        }
    }
}

pub fn cr_run(g: &ColoredMultigraph, opts: CrOptions) -> CrRun {
    let p = prepare(g);
    let n = p.n;
    let mut part = Partition::new(p.initial.clone());
    let mut rounds = vec![part.color.clone()];
    let mut class_counts = vec![part.class_count()];
    let cap = opts.max_rounds.unwrap_or(usize::MAX);
    let mut stable_round = None;
    let mut stamp = vec![u32::MAX; n];

    let record = |rounds: &mut Vec<Vec<u32>>, color: &Vec<u32>| {
        if opts.trace {
            rounds.push(color.clone());
        } else {
            rounds[0].clone_from(color);
        }
    };

    if cap == 0 {
        return CrRun { rounds, traced: opts.trace, class_counts, stable_round };
    }

    // Round 1: full signatures.
    let mut moved = Vec::new();
    {
        let color = &part.color;
        // Signatures share one buffer laid out like `adj`.
        let mut flat: Vec<(u32, u32)> = p.adj.iter().map(|&(w, l, _)| (l, color[w as usize])).collect();
        for v in 0..n {
            flat[p.adj_start[v]..p.adj_start[v + 1]].sort_unstable();
        }
        let sig = |v: u32| &flat[p.adj_start[v as usize]..p.adj_start[v as usize + 1]];
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&a, &b| color[a as usize].cmp(&color[b as usize]).then_with(|| sig(a).cmp(sig(b))));
        let mut i = 0;
        let mut plan: Vec<(u32, Vec<Vec<u32>>)> = Vec::new();
        while i < order.len() {
            let class = color[order[i] as usize];
            let mut groups: Vec<Vec<u32>> = Vec::new();
            let mut j = i;
            while j < order.len() && color[order[j] as usize] == class {
                let start = j;
                while j < order.len()
                    && color[order[j] as usize] == class
                    && sig(order[j]) == sig(order[start])
                {
                    j += 1;
                }
                groups.push(order[start..j].to_vec());
            }
            plan.push((class, groups));
            i = j;
        }
        for (class, groups) in plan {
            let refs: Vec<&[u32]> = groups.iter().map(Vec::as_slice).collect();
            split_class(&mut part, class, 0, &refs, &stamp, 0, &mut moved);
        }
    }
    class_counts.push(part.class_count());
    record(&mut rounds, &part.color);
    if moved.is_empty() {
        stable_round = Some(0);
    }

    let mut round: u32 = 1;
    while stable_round.is_none() && (round as usize) < cap {
        round += 1;
        // D(u): multiset of (λ(u, w), new class of w) over moved neighbors w.
        let mut entries: Vec<(u32, u32, u32)> = Vec::new();
        for &w in &moved {
            let cw = part.color[w as usize];
            for &(u, _, back) in &p.adj[p.adj_start[w as usize]..p.adj_start[w as usize + 1]] {
                entries.push((u, back, cw));
            }
        }
        entries.sort_unstable();
        let mut touched: Vec<(u32, usize, usize)> = Vec::new();
        let mut i = 0;
        while i < entries.len() {
            let u = entries[i].0;
            let mut j = i;
            while j < entries.len() && entries[j].0 == u {
                j += 1;
            }
            stamp[u as usize] = round;
            touched.push((u, i, j));
            i = j;
        }
        let key = |&(u, s, e): &(u32, usize, usize)| (part.color[u as usize], entries[s..e].iter().map(|x| (x.1, x.2)));
        touched.sort_by(|a, b| {
            let (ca, ia) = key(a);
            let (cb, ib) = key(b);
            ca.cmp(&cb).then_with(|| ia.cmp(ib))
        });
        let same_d = |a: &(u32, usize, usize), b: &(u32, usize, usize)| {
            a.2 - a.1 == b.2 - b.1
                && entries[a.1..a.2].iter().zip(&entries[b.1..b.2]).all(|(x, y)| (x.1, x.2) == (y.1, y.2))
        };
        let mut plan: Vec<(u32, usize, Vec<Vec<u32>>)> = Vec::new();
        let mut i = 0;
        while i < touched.len() {
            let class = part.color[touched[i].0 as usize];
            let mut groups: Vec<Vec<u32>> = Vec::new();
            let mut count = 0;
            let mut j = i;
            while j < touched.len() && part.color[touched[j].0 as usize] == class {
                let start = j;
                while j < touched.len() && part.color[touched[j].0 as usize] == class && same_d(&touched[start], &touched[j]) {
                    j += 1;
                }
                groups.push(touched[start..j].iter().map(|t| t.0).collect());
                count += j - start;
            }
            let untouched = part.members[class as usize].len() - count;
            plan.push((class, untouched, groups));
            i = j;
        }
        let mut next_moved = Vec::new();
        for (class, untouched, groups) in plan {
            let refs: Vec<&[u32]> = groups.iter().map(Vec::as_slice).collect();
            split_class(&mut part, class, untouched, &refs, &stamp, round, &mut next_moved);
        }
        moved = next_moved;
        class_counts.push(part.class_count());
        record(&mut rounds, &part.color);
        if moved.is_empty() {
            stable_round = Some(round as usize - 1);
        }
    }
    CrRun { rounds, traced: opts.trace, class_counts, stable_round }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CrError {
    #[error("label registries differ")]
    NamespaceMismatch,
}

/// Smallest round in which CR on `G ⊎ H` gives the two sides different
/// color histograms, or `None` if the stable coloring does not separate them.
pub fn cr_distinguishes(g: &ColoredMultigraph, h: &ColoredMultigraph) -> Result<Option<usize>, CrError> {
    let u = g.disjoint_union(h).ok_or(CrError::NamespaceMismatch)?;
    let run = cr_run(&u, CrOptions { max_rounds: None, trace: true });
    let split = g.node_count();
    for round in 0..run.computed_rounds() {
        let mut hist: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
        for (v, &c) in run.colors(round).iter().enumerate() {
            let e = hist.entry(c).or_insert((0, 0));
            if v < split {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
        if hist.values().any(|(a, b)| a != b) {
            return Ok(Some(round));
        }
    }
    Ok(None)
}

/// Relabels a coloring by first occurrence so that equal partitions compare
/// equal.
pub fn canonical_partition(colors: impl IntoIterator<Item = u32>) -> Vec<u32> {
    let mut ids: HashMap<u32, u32> = HashMap::new();
    colors
        .into_iter()
        .map(|c| {
            let next = ids.len() as u32;
            *ids.entry(c).or_insert(next)
        })
        .collect()
}
