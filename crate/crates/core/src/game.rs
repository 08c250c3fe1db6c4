//! The guarded counting game.
//!
//! Duplicator survives a round from `(a, b)` after Spoiler picks `R` exactly
//! when the bipartite graph between `R^A` and `R^B` whose edges are the
//! surviving replies has a perfect matching. A reply `(a', b')` survives when
//! `stp(a, a') = stp(b, b')`, `(a', b')` is not distinguishing, and Duplicator
//! survives the remaining rounds from `(a', b')`.

use std::collections::HashMap;

use crate::structure::{Elem, RelId, Structure};
use crate::types::SimType;

/// Why a configuration is distinguishing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mismatch {
    Arity,
    Stp { a: SimType, b: SimType },
    /// The subtuples at these 1-based positions have different atomic types.
    Atp { positions: Vec<usize>, a: Vec<RelId>, b: Vec<RelId> },
}

/// Checks whether `((A, ca), (B, cb))` is distinguishing and says why.
pub fn distinguishing_reason(a: &Structure, b: &Structure, ca: &[Elem], cb: &[Elem]) -> Option<Mismatch> {
    if ca.len() != cb.len() {
        return Some(Mismatch::Arity);
    }
    if ca.is_empty() {
        return None;
    }
    let (sa, sb) = (SimType::diag(ca), SimType::diag(cb));
    if sa != sb {
        return Some(Mismatch::Stp { a: sa, b: sb });
    }
    let check = |s: &Structure, t: &Structure, cs: &[Elem], ct: &[Elem], swap: bool| -> Option<Mismatch> {
        for tup in s.tuples() {
            let positions: Option<Vec<usize>> =
                tup.elems.iter().map(|x| cs.iter().position(|y| y == x)).collect();
            let Some(positions) = positions else { continue };
            let image: Vec<Elem> = positions.iter().map(|&p| ct[p]).collect();
            let other = t.atp(&image);
            if other != tup.atp.as_slice() {
                let positions = positions.iter().map(|p| p + 1).collect();
                let (x, y) = (tup.atp.clone(), other.to_vec());
                let (a, b) = if swap { (y, x) } else { (x, y) };
                return Some(Mismatch::Atp { positions, a, b });
            }
        }
        None
    };
    check(a, b, ca, cb, false).or_else(|| check(b, a, cb, ca, true))
}

pub fn is_distinguishing(a: &Structure, b: &Structure, ca: &[Elem], cb: &[Elem]) -> bool {
    distinguishing_reason(a, b, ca, cb).is_some()
}

/// Explanation of a Spoiler win.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpoilerWin {
    /// The configuration itself is distinguishing.
    Distinguishing(Mismatch),
    /// Spoiler picks `rel`, which has different sizes on the two sides.
    SizeMismatch { rel: RelId },
    /// Spoiler picks `rel`. Every bijection sends some tuple of `hall_set`
    /// outside `partners`, its set of surviving replies, because
    /// `partners` is smaller. `replies` explains the losing replies.
    NoMatching {
        rel: RelId,
        hall_set: Vec<Vec<Elem>>,
        partners: Vec<Vec<Elem>>,
        replies: Vec<Reply>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reply {
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
    pub reason: ReplyLoss,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplyLoss {
    StpChange { a: SimType, b: SimType },
    Continues(Option<Box<SpoilerWin>>),
}

pub struct GameSolver<'s> {
    a: &'s Structure,
    b: &'s Structure,
    memo: HashMap<(Vec<Elem>, Vec<Elem>), usize>,
    lost: HashMap<(Vec<Elem>, Vec<Elem>), usize>,
}

impl<'s> GameSolver<'s> {
    pub fn new(a: &'s Structure, b: &'s Structure) -> Self {
        GameSolver { a, b, memo: HashMap::new(), lost: HashMap::new() }
    }

    /// Whether Duplicator has an `rounds`-round winning strategy.
    pub fn duplicator_wins(&mut self, ca: &[Elem], cb: &[Elem], rounds: usize) -> bool {
        let key = (ca.to_vec(), cb.to_vec());
        if let Some(&r) = self.memo.get(&key) {
            if rounds <= r {
                return true;
            }
        }
        if let Some(&r) = self.lost.get(&key) {
            if rounds >= r {
                return false;
            }
        }
        let wins = !is_distinguishing(self.a, self.b, ca, cb)
            && (rounds == 0 || self.a.signature().rel_ids().all(|rel| self.matching(ca, cb, rel, rounds).is_ok()));
        if wins {
            let e = self.memo.entry(key).or_insert(0);
            *e = (*e).max(rounds);
        } else {
            let e = self.lost.entry(key).or_insert(usize::MAX);
            *e = (*e).min(rounds);
        }
        wins
    }

    /// Replies that survive: `good[x]` lists indices into `R^B` for tuple
    /// `x` of `R^A`.
    fn surviving(&mut self, ca: &[Elem], cb: &[Elem], rel: RelId, rounds: usize) -> Vec<Vec<usize>> {
        let (a, b) = (self.a, self.b);
        let ra = a.relation(rel);
        let rb = b.relation(rel);
        let mut good = vec![Vec::new(); ra.len()];
        for (x, ta) in ra.iter().enumerate() {
            let sa = SimType::of(ca, ta);
            for (y, tb) in rb.iter().enumerate() {
                if SimType::of(cb, tb) == sa && self.duplicator_wins(ta, tb, rounds - 1) {
                    good[x].push(y);
                }
            }
        }
        good
    }

    /// A perfect matching, or the left side of a Hall violator.
    fn matching(&mut self, ca: &[Elem], cb: &[Elem], rel: RelId, rounds: usize) -> Result<(), (Vec<usize>, Vec<usize>)> {
        let (na, nb) = (self.a.relation(rel).len(), self.b.relation(rel).len());
        if na != nb {
            return Err((Vec::new(), Vec::new()));
        }
        let good = self.surviving(ca, cb, rel, rounds);
        let mut match_b: Vec<Option<usize>> = vec![None; nb];
        for x in 0..na {
            let mut seen = vec![false; nb];
            if !augment(x, &good, &mut match_b, &mut seen) {
                // Alternating reachability from x gives the Hall violator.
                let mut left = vec![x];
                let mut in_left = vec![false; na];
                in_left[x] = true;
                let mut right = Vec::new();
                let mut in_right = vec![false; nb];
                let mut i = 0;
                while i < left.len() {
                    for &y in &good[left[i]] {
                        if !in_right[y] {
                            in_right[y] = true;
                            right.push(y);
                            if let Some(x2) = match_b[y] {
                                if !in_left[x2] {
                                    in_left[x2] = true;
                                    left.push(x2);
                                }
                            }
                        }
                    }
                    i += 1;
                }
                return Err((left, right));
            }
        }
        Ok(())
    }

    /// Explains a Spoiler win with at most `depth` nested levels.
    pub fn explain(&mut self, ca: &[Elem], cb: &[Elem], rounds: usize, depth: usize) -> Option<SpoilerWin> {
        if let Some(m) = distinguishing_reason(self.a, self.b, ca, cb) {
            return Some(SpoilerWin::Distinguishing(m));
        }
        if rounds == 0 {
            return None;
        }
        for rel in self.a.signature().rel_ids().collect::<Vec<_>>() {
            if self.a.relation(rel).len() != self.b.relation(rel).len() {
                return Some(SpoilerWin::SizeMismatch { rel });
            }
            let Err((left, right)) = self.matching(ca, cb, rel, rounds) else { continue };
            let ra = self.a.relation(rel).to_vec();
            let rb = self.b.relation(rel).to_vec();
            let mut replies = Vec::new();
            if depth > 0 {
                for &x in &left {
                    for (y, tb) in rb.iter().enumerate() {
                        if right.contains(&y) {
                            continue;
                        }
                        let (sa, sb) = (SimType::of(ca, &ra[x]), SimType::of(cb, tb));
                        let reason = if sa != sb {
                            ReplyLoss::StpChange { a: sa, b: sb }
                        } else {
                            ReplyLoss::Continues(self.explain(&ra[x], tb, rounds - 1, depth - 1).map(Box::new))
                        };
                        replies.push(Reply { a: ra[x].clone(), b: tb.clone(), reason });
                    }
                }
            }
            return Some(SpoilerWin::NoMatching {
                rel,
                hall_set: left.iter().map(|&x| ra[x].clone()).collect(),
                partners: right.iter().map(|&y| rb[y].clone()).collect(),
                replies,
            });
        }
        None
    }
}

fn augment(x: usize, good: &[Vec<usize>], match_b: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &y in &good[x] {
        if seen[y] {
            continue;
        }
        seen[y] = true;
        if match_b[y].is_none() || augment(match_b[y].expect("matched"), good, match_b, seen) {
            match_b[y] = Some(x);
            return true;
        }
    }
    false
}

/// Rounds after which the game outcome no longer changes.
pub fn round_bound(a: &Structure, b: &Structure) -> usize {
    a.size() + b.size() + 2
}

/// Whether Spoiler wins within `rounds` rounds from the given configuration.
pub fn spoiler_wins(a: &Structure, b: &Structure, rounds: usize, ca: &[Elem], cb: &[Elem]) -> bool {
    !GameSolver::new(a, b).duplicator_wins(ca, cb, rounds)
}

pub fn render_win(a: &Structure, b: &Structure, win: &SpoilerWin, indent: usize, out: &mut String) {
    use std::fmt::Write as _;
    let pad = "  ".repeat(indent);
    let show = |s: &Structure, t: &[Elem]| {
        let names: Vec<&str> = t.iter().map(|&e| s.elem_name(e)).collect();
        format!("({})", names.join(","))
    };
    let rels = |rs: &[RelId]| {
        let names: Vec<&str> = rs.iter().map(|&r| a.signature().name(r)).collect();
        format!("{{{}}}", names.join(","))
    };
    match win {
        SpoilerWin::Distinguishing(Mismatch::Arity) => {
            let _ = writeln!(out, "{pad}distinguishing: arities differ");
        }
        SpoilerWin::Distinguishing(Mismatch::Stp { a: x, b: y }) => {
            let _ = writeln!(out, "{pad}distinguishing: stp {x} vs {y}");
        }
        SpoilerWin::Distinguishing(Mismatch::Atp { positions, a: x, b: y }) => {
            let pos: Vec<String> = positions.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{pad}distinguishing: positions ({}) have atp {} vs {}", pos.join(","), rels(x), rels(y));
        }
        SpoilerWin::SizeMismatch { rel } => {
            let _ = writeln!(out, "{pad}spoiler picks {}: sizes differ", a.signature().name(*rel));
        }
        SpoilerWin::NoMatching { rel, hall_set, partners, replies } => {
            let hs: Vec<String> = hall_set.iter().map(|t| show(a, t)).collect();
            let ps: Vec<String> = partners.iter().map(|t| show(b, t)).collect();
            let _ = writeln!(
                out,
                "{pad}spoiler picks {}: tuples [{}] have only [{}] as safe replies",
                a.signature().name(*rel),
                hs.join(" "),
                ps.join(" ")
            );
            for r in replies {
                match &r.reason {
                    ReplyLoss::StpChange { a: x, b: y } => {
                        let _ = writeln!(out, "{pad}  {} -> {}: stp with previous {} vs {}", show(a, &r.a), show(b, &r.b), x, y);
                    }
                    ReplyLoss::Continues(sub) => {
                        let _ = writeln!(out, "{pad}  {} -> {}:", show(a, &r.a), show(b, &r.b));
                        match sub {
                            Some(w) => render_win(a, b, w, indent + 2, out),
                            None => {
                                let _ = writeln!(out, "{pad}    (not expanded)");
                            }
                        }
                    }
                }
            }
        }
    }
}
