//! Relational color refinement on the tuples of a structure.
//!
//! Round 0 colors a tuple by its atomic and similarity type. Round `i + 1`
//! pairs the previous color with the multiset of `(stp(a, b), ρ_i(b))` over
//! all tuples `b` overlapping `a`, `a` itself included. Colors are interned
//! per run, so color ids are only comparable within one run.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::structure::{disjoint_union, DisjointUnion, RelId, Side, Structure, StructureError, TupId};
use crate::types::SimType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct ColorId(pub u32);

impl ColorId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ColorKey {
    Initial { atp: Vec<RelId>, stp: SimType },
    /// `neighbors` is the sorted multiset, repeated entries kept.
    Refined { prev: ColorId, neighbors: Vec<(SimType, ColorId)> },
}

#[derive(Clone, Debug)]
pub struct ColorInfo {
    pub round: usize,
    pub arity: usize,
    pub key: ColorKey,
}

/// Maps canonical color encodings to dense ids and keeps the decoding log.
#[derive(Clone, Debug, Default)]
pub struct ColorInterner {
    ids: HashMap<ColorKey, ColorId>,
    log: Vec<ColorInfo>,
}

impl ColorInterner {
    pub fn intern(&mut self, round: usize, key: ColorKey) -> ColorId {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let arity = match &key {
            ColorKey::Initial { stp, .. } => stp.arities().0,
            ColorKey::Refined { prev, .. } => self.log[prev.index()].arity,
        };
        let id = ColorId(self.log.len() as u32);
        self.ids.insert(key.clone(), id);
        self.log.push(ColorInfo { round, arity, key });
        id
    }

    pub fn info(&self, id: ColorId) -> &ColorInfo {
        &self.log[id.index()]
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    /// Round-0 ancestor of a color; it carries the atomic and similarity type.
    pub fn initial(&self, mut id: ColorId) -> (&[RelId], SimType) {
        loop {
            match &self.log[id.index()].key {
                ColorKey::Initial { atp, stp } => return (atp, *stp),
                ColorKey::Refined { prev, .. } => id = *prev,
            }
        }
    }

    /// Canonical byte encoding of one log entry.
    pub fn encode(&self, id: ColorId) -> Vec<u8> {
        let mut out = Vec::new();
        match &self.log[id.index()].key {
            ColorKey::Initial { atp, stp } => {
                out.push(0);
                out.extend((atp.len() as u32).to_le_bytes());
                for r in atp {
                    out.extend(r.0.to_le_bytes());
                }
                out.extend(stp.encode());
            }
            ColorKey::Refined { prev, neighbors } => {
                out.push(1);
                out.extend(prev.0.to_le_bytes());
                out.extend((neighbors.len() as u32).to_le_bytes());
                for (t, c) in neighbors {
                    out.extend(t.encode());
                    out.extend(c.0.to_le_bytes());
                }
            }
        }
        out
    }

    /// Human-readable log, one color per line.
    pub fn export(&self, a: &Structure) -> String {
        let mut out = String::from("color_id,round,arity,definition\n");
        for (i, info) in self.log.iter().enumerate() {
            let def = match &info.key {
                ColorKey::Initial { atp, stp } => {
                    let names: Vec<&str> = atp.iter().map(|&r| a.signature().name(r)).collect();
                    format!("atp=[{}] stp={}", names.join(" "), stp)
                }
                ColorKey::Refined { prev, neighbors } => {
                    let mut s = format!("prev={} N=[", prev.0);
                    for (n, (t, c)) in neighbors.iter().enumerate() {
                        if n > 0 {
                            s.push(' ');
                        }
                        let _ = write!(s, "{}:{}", t, c.0);
                    }
                    s.push(']');
                    s
                }
            };
            let _ = writeln!(out, "{},{},{},{}", i, info.round, info.arity, def);
        }
        out
    }
}

/// Result of running RCR on one structure.
#[derive(Clone, Debug)]
pub struct RcrRun {
    /// `colors[i][t]` is `ρ_i(t)`.
    pub colors: Vec<Vec<ColorId>>,
    pub interner: ColorInterner,
    /// Smallest `i` with `ρ_{i+1}` inducing the same partition as `ρ_i`.
    /// `None` when the round cap was hit first.
    pub stable_round: Option<usize>,
    /// For every tuple, the overlapping tuples and their similarity types.
    pub neighbors: Vec<Vec<(TupId, SimType)>>,
}

impl RcrRun {
    pub fn rounds(&self) -> usize {
        self.colors.len()
    }

    /// Colors of round `i`, clamped to the last computed round.
    pub fn round(&self, i: usize) -> &[ColorId] {
        &self.colors[i.min(self.colors.len() - 1)]
    }

    pub fn color(&self, i: usize, t: TupId) -> ColorId {
        self.round(i)[t.index()]
    }

    pub fn class_count(&self, i: usize) -> usize {
        self.histogram(i).len()
    }

    pub fn histogram(&self, i: usize) -> BTreeMap<ColorId, usize> {
        let mut h = BTreeMap::new();
        for &c in self.round(i) {
            *h.entry(c).or_insert(0) += 1;
        }
        h
    }

    /// Colors that occur in round `i`.
    pub fn colors_at(&self, i: usize) -> Vec<ColorId> {
        self.histogram(i).into_keys().collect()
    }

    /// Tuple-level trace as CSV with one line per relation occurrence.
    pub fn trace_csv(&self, a: &Structure) -> String {
        let mut out = String::from("round,relation,tuple_index,color_id\n");
        for (i, round) in self.colors.iter().enumerate() {
            for rel in a.signature().rel_ids() {
                for (idx, t) in a.relation(rel).iter().enumerate() {
                    let id = a.tup_id(t).expect("relation tuple in Tup");
                    let _ = writeln!(out, "{},{},{},{}", i, a.signature().name(rel), idx, round[id.index()].0);
                }
            }
        }
        out
    }
}

/// Runs RCR until the partition is stable or `max_rounds` refinement steps
/// were made. The default cap is `|Tup(A)|`, which always suffices.
pub fn rcr_run(a: &Structure, max_rounds: Option<usize>) -> RcrRun {
    let cap = max_rounds.unwrap_or(a.size().max(1));
    let neighbors = a.overlaps();
    let mut interner = ColorInterner::default();
    let round0: Vec<ColorId> = a
        .tuples()
        .iter()
        .map(|t| interner.intern(0, ColorKey::Initial { atp: t.atp.clone(), stp: SimType::diag(&t.elems) }))
        .collect();
    let mut classes = count_classes(&round0);
    let mut colors = vec![round0];
    let mut stable_round = None;
    for i in 0..cap {
        let prev = &colors[i];
        let next: Vec<ColorId> = neighbors
            .iter()
            .enumerate()
            .map(|(t, row)| {
                let mut multiset: Vec<(SimType, ColorId)> =
                    row.iter().map(|&(b, stp)| (stp, prev[b.index()])).collect();
                multiset.sort_unstable();
                interner.intern(i + 1, ColorKey::Refined { prev: prev[t], neighbors: multiset })
            })
            .collect();
        let next_classes = count_classes(&next);
        colors.push(next);
        if next_classes == classes {
            stable_round = Some(i);
            break;
        }
        classes = next_classes;
    }
    RcrRun { colors, interner, stable_round, neighbors }
}

fn count_classes(colors: &[ColorId]) -> usize {
    let mut seen: Vec<ColorId> = colors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// A joint run on `A ⊎ B`, with per-side histograms.
#[derive(Clone, Debug)]
pub struct JointRun {
    pub union: DisjointUnion,
    pub run: RcrRun,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Distinction {
    pub round: usize,
    pub color: ColorId,
    /// Number of tuples of that color in `A` and in `B`.
    pub count_a: usize,
    pub count_b: usize,
}

impl JointRun {
    pub fn new(a: &Structure, b: &Structure) -> Result<Self, StructureError> {
        let union = disjoint_union(a, b)?;
        let run = rcr_run(&union.structure, None);
        Ok(JointRun { union, run })
    }

    pub fn side_histogram(&self, round: usize, side: Side) -> BTreeMap<ColorId, usize> {
        let mut h = BTreeMap::new();
        for (t, &c) in self.run.round(round).iter().enumerate() {
            if self.union.tup_side(TupId(t as u32)) == side {
                *h.entry(c).or_insert(0) += 1;
            }
        }
        h
    }

    /// First round whose histograms differ, with the smallest witness color.
    pub fn first_difference(&self) -> Option<Distinction> {
        for round in 0..self.run.rounds() {
            let ha = self.side_histogram(round, Side::Left);
            let hb = self.side_histogram(round, Side::Right);
            if ha != hb {
                let color = *ha
                    .keys()
                    .chain(hb.keys())
                    .filter(|c| ha.get(c) != hb.get(c))
                    .min()
                    .expect("histograms differ");
                return Some(Distinction {
                    round,
                    color,
                    count_a: ha.get(&color).copied().unwrap_or(0),
                    count_b: hb.get(&color).copied().unwrap_or(0),
                });
            }
        }
        None
    }
}

/// Whether RCR tells `A` and `B` apart. Structures of different strict size
/// are always separated in round 0, since round-0 colors include atomic types.
pub fn rcr_distinguishes(a: &Structure, b: &Structure) -> Result<Option<Distinction>, StructureError> {
    Ok(JointRun::new(a, b)?.first_difference())
}
