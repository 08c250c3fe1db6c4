//! Formulas defining RCR colors.
//!
//! `φ_c(x)` holds of a tuple of the run exactly when the tuple has color `c`.
//! A refined color `(p, N)` becomes `φ_p(x)` plus, for every round-`i` color
//! `d` and similarity type `τ` seen with `d` somewhere in round `i + 1` of the
//! run, an exact count of the tuples `y` of color `d` that agree with `x` at
//! least on the positions `τ` links. Such counts are sums over the supertypes
//! of `τ`, so they pin down the multiset `N` on every tuple of the run. They do
//! not on tuples outside it.
//!
//! A guard cannot mention variables it does not bind, so `stp(x, y) = τ`
//! exactly is not expressible, hence the supertype sums.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{and_all, atom, count_exactly, count_geq, dag_size, eq, not, Atom, LogicError, Var, F};
use crate::rcr::{ColorId, ColorKey, JointRun, RcrRun};
use crate::structure::{Side, Signature};
use crate::types::SimType;

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

pub struct Synthesizer<'r> {
    run: &'r RcrRun,
    sig: &'r Signature,
    /// `y1 .. ym` then `y1' .. ym'`; index `j` and `j + m` are complements.
    pool: Vec<Var>,
    /// `types[i][d]`: the types paired with `d` in round `i + 1`.
    types: Vec<HashMap<ColorId, BTreeSet<SimType>>>,
    /// Colors present in each round, sorted.
    present: Vec<Vec<ColorId>>,
    cache: HashMap<(ColorId, Vec<usize>), F>,
    budget: usize,
    nodes: usize,
}

impl<'r> Synthesizer<'r> {
    pub fn new(run: &'r RcrRun, sig: &'r Signature) -> Self {
        let m = sig.max_arity().max(1);
        let pool = (1..=m).map(|i| Var::new(&format!("y{i}"))).chain((1..=m).map(|i| Var::new(&format!("y{i}'")))).collect();
        let mut types = Vec::new();
        let mut present = Vec::new();
        for i in 0..run.rounds() {
            present.push(run.colors_at(i));
            let mut t: HashMap<ColorId, BTreeSet<SimType>> = HashMap::new();
            if i + 1 < run.rounds() {
                for c in run.colors_at(i + 1) {
                    if let ColorKey::Refined { neighbors, .. } = &run.interner.info(c).key {
                        for &(tau, d) in neighbors {
                            t.entry(d).or_default().insert(tau);
                        }
                    }
                }
            }
            types.push(t);
        }
        Synthesizer { run, sig, pool, types, present, cache: HashMap::new(), budget: DEFAULT_NODE_BUDGET, nodes: 0 }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// `φ_c(x1, .., xk)` where `k` is the arity of `c`.
    pub fn color_formula(&mut self, c: ColorId) -> Result<F, LogicError> {
        if c.index() >= self.run.interner.len() {
            return Err(LogicError::UnknownColor(c.0));
        }
        let k = self.run.interner.info(c).arity;
        self.phi(c, &(0..k).collect::<Vec<_>>())
    }

    /// Free variables of [`Self::color_formula`] for a color of arity `k`.
    pub fn free_vars(&self, k: usize) -> Vec<Var> {
        self.pool[..k].to_vec()
    }

    fn tick(&mut self, n: usize) -> Result<(), LogicError> {
        self.nodes += n;
        if self.nodes > self.budget {
            Err(LogicError::Budget(self.budget))
        } else {
            Ok(())
        }
    }

    fn vars(&self, xs: &[usize]) -> Vec<Var> {
        xs.iter().map(|&i| self.pool[i].clone()).collect()
    }

    /// `xs[j]` is the pool index of the variable at position `j`.
    fn phi(&mut self, c: ColorId, xs: &[usize]) -> Result<F, LogicError> {
        if let Some(f) = self.cache.get(&(c, xs.to_vec())) {
            return Ok(f.clone());
        }
        let info = self.run.interner.info(c).clone();
        let f = match &info.key {
            ColorKey::Initial { atp, stp } => self.initial(atp, *stp, xs)?,
            ColorKey::Refined { prev, neighbors } => {
                let mut parts = vec![self.phi(*prev, xs)?];
                let round = info.round - 1;
                let (_, diag) = self.run.interner.initial(c);
                // Multiplicities of (τ, d) in this color's multiset.
                let mut mult: BTreeMap<(ColorId, SimType), u64> = BTreeMap::new();
                for &(tau, d) in neighbors {
                    *mult.entry((d, tau)).or_insert(0) += 1;
                }
                for d in self.present[round].clone() {
                    let Some(ts) = self.types[round].get(&d).cloned() else { continue };
                    for &tau in ts.iter().filter(|t| t.arities().0 == xs.len() && closed_under(**t, diag)) {
                        let n: u64 = ts.iter().filter(|t2| tau.is_subset(**t2)).map(|t2| mult.get(&(d, *t2)).copied().unwrap_or(0)).sum();
                        parts.push(self.count(d, tau, n, xs)?);
                    }
                }
                self.tick(parts.len())?;
                and_all(parts)
            }
        };
        self.cache.insert((c, xs.to_vec()), f.clone());
        Ok(f)
    }

    fn initial(&mut self, atp: &[crate::structure::RelId], stp: SimType, xs: &[usize]) -> Result<F, LogicError> {
        let k = xs.len();
        let vars = self.vars(xs);
        let mut parts = Vec::new();
        for r in self.sig.rel_ids().filter(|&r| self.sig.arity(r) == k) {
            let a = atom(self.sig.name(r), &vars);
            parts.push(if atp.contains(&r) { a } else { not(a) });
        }
        for i in 0..k {
            for j in i + 1..k {
                if xs[i] == xs[j] && stp.contains(i, j) {
                    continue;
                }
                let e = eq(&vars[i], &vars[j]);
                parts.push(if stp.contains(i, j) { e } else { not(e) });
            }
        }
        self.tick(2 * parts.len() + 1)?;
        Ok(and_all(parts))
    }

    /// `∃=n y. R(y) ∧ φ_d(y)` where `y` reuses `x` on the positions `τ` links.
    /// A free position `j` takes the complement of `x_j`, as long as that
    /// variable is not taken; after a few nesting levels positions no longer
    /// hold their own pair, so the lowest free pool variable is the fallback.
    fn count(&mut self, d: ColorId, tau: SimType, n: u64, xs: &[usize]) -> Result<F, LogicError> {
        let info = self.run.interner.info(d);
        let l = info.arity;
        let (atp, _) = self.run.interner.initial(d);
        let rel = atp[0];
        let mut used: Vec<bool> = vec![false; self.pool.len()];
        xs.iter().for_each(|&i| used[i] = true);
        let mut ys = Vec::with_capacity(l);
        let mut fresh = Vec::new();
        for j in 0..l {
            match (0..xs.len()).find(|&i| tau.contains(i, j)) {
                Some(i) => ys.push(xs[i]),
                None => {
                    let m = self.pool.len() / 2;
                    let preferred = if j < xs.len() { (xs[j] + m) % (2 * m) } else { j };
                    let v = if !used[preferred] {
                        preferred
                    } else {
                        used.iter().position(|u| !u).expect("pool has room for one tuple")
                    };
                    used[v] = true;
                    ys.push(v);
                    fresh.push(v);
                }
            }
        }
        let body = self.phi(d, &ys)?;
        let guard = Atom { rel: self.sig.name(rel).to_string(), args: self.vars(&ys) };
        self.tick(3)?;
        Ok(count_exactly(n, self.vars(&fresh), guard, body))
    }
}

/// `φ_c` for a color of a single-structure run.
pub fn synthesize_color_formula(run: &RcrRun, sig: &Signature, c: ColorId) -> Result<F, LogicError> {
    Synthesizer::new(run, sig).color_formula(c)
}

#[derive(Clone, Debug)]
pub struct DistinguishingSentence {
    pub formula: F,
    /// The structure the sentence holds in; it fails in the other one.
    pub holds_in: Side,
    pub round: usize,
    pub dag_size: usize,
}

/// A sentence counting the tuples of the first color on which the
/// histograms of `A` and `B` differ.
pub fn distinguishing_sentence(joint: &JointRun, budget: usize) -> Result<DistinguishingSentence, LogicError> {
    let d = joint.first_difference().ok_or(LogicError::Indistinguishable)?;
    let sig = joint.union.structure.signature();
    let mut s = Synthesizer::new(&joint.run, sig).with_budget(budget);
    let phi = s.color_formula(d.color)?;
    let k = joint.run.interner.info(d.color).arity;
    let (atp, _) = joint.run.interner.initial(d.color);
    let guard = Atom { rel: sig.name(atp[0]).to_string(), args: s.free_vars(k) };
    let (n, holds_in) = if d.count_a > d.count_b { (d.count_a, Side::Left) } else { (d.count_b, Side::Right) };
    let formula = count_geq(n as u64, s.free_vars(k), guard, phi);
    let size = dag_size(&formula);
    Ok(DistinguishingSentence { formula, holds_in, round: d.round, dag_size: size })
}

/// Whether every nonempty column of `tau` is a full class of `diag`, which
/// holds for the type of any pair whose left tuple has diagonal type `diag`.
fn closed_under(tau: SimType, diag: SimType) -> bool {
    let (k, l) = tau.arities();
    (0..l).all(|j| match (0..k).find(|&i| tau.contains(i, j)) {
        None => true,
        Some(i) => (0..k).all(|i2| tau.contains(i2, j) == diag.contains(i, i2)),
    })
}
