//! Guarded first-order logic with counting quantifiers.
//!
//! Formulas are immutable DAGs: subformulas are shared through `Rc`, and
//! the checker, evaluator and size functions all work per distinct node.

mod eval;
mod sexp;
mod synth;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

pub use eval::{evaluate, evaluate_sentence, Evaluator};
pub use sexp::{parse_formula, to_sexp};
pub use synth::{distinguishing_sentence, synthesize_color_formula, DistinguishingSentence, Synthesizer, DEFAULT_NODE_BUDGET};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub Rc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Rc::from(name))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub rel: String,
    pub args: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Eq(Var, Var),
    Not(F),
    And(F, F),
    /// `∃≥n vars . (guard ∧ body)`.
    CountExists { n: u64, vars: Vec<Var>, guard: Atom, body: F },
}

pub type F = Rc<Formula>;

pub fn atom(rel: &str, args: &[Var]) -> F {
    Rc::new(Formula::Atom(Atom { rel: rel.to_string(), args: args.to_vec() }))
}

pub fn eq(x: &Var, y: &Var) -> F {
    Rc::new(Formula::Eq(x.clone(), y.clone()))
}

pub fn not(f: F) -> F {
    Rc::new(Formula::Not(f))
}

pub fn and(f: F, g: F) -> F {
    Rc::new(Formula::And(f, g))
}

/// Right-nested conjunction. Panics on an empty list.
pub fn and_all(fs: Vec<F>) -> F {
    let mut it = fs.into_iter().rev();
    let last = it.next().expect("non-empty conjunction");
    it.fold(last, |acc, f| and(f, acc))
}

pub fn count_geq(n: u64, vars: Vec<Var>, guard: Atom, body: F) -> F {
    Rc::new(Formula::CountExists { n, vars, guard, body })
}

/// `∃=n`, written as `∃≥n ∧ ¬∃≥n+1`, or `¬∃≥1` when `n = 0`.
pub fn count_exactly(n: u64, vars: Vec<Var>, guard: Atom, body: F) -> F {
    if n == 0 {
        return not(count_geq(1, vars, guard, body));
    }
    and(
        count_geq(n, vars.clone(), guard.clone(), body.clone()),
        not(count_geq(n + 1, vars, guard, body)),
    )
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("quantifier count must be at least 1")]
    ZeroCount,
    #[error("quantified variable `{0}` does not occur in the guard")]
    VarNotInGuard(String),
    #[error("variable `{0}` is quantified twice in one block")]
    DuplicateVar(String),
    #[error("free variable `{0}` of the body is not covered by the guard")]
    Unguarded(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("relation `{rel}` has arity {expected}, used with {found} arguments")]
    ArityMismatch { rel: String, expected: usize, found: usize },
    #[error("variable `{0}` is not assigned")]
    Unbound(String),
    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("formula exceeds the node budget of {0}")]
    Budget(usize),
    #[error("color {0} is not part of the run")]
    UnknownColor(u32),
    #[error("the structures are not distinguished")]
    Indistinguishable,
    #[error(transparent)]
    Structure(#[from] crate::structure::StructureError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfInfo {
    pub free: BTreeSet<Var>,
    /// Guard depth: nesting depth of counting quantifiers.
    pub gd: usize,
}

fn key(f: &F) -> *const Formula {
    Rc::as_ptr(f)
}

/// Checks the guardedness conditions and returns free variables and guard
/// depth.
pub fn check_wf(f: &F) -> Result<WfInfo, LogicError> {
    let mut memo = HashMap::new();
    check_node(f, &mut memo).map(|r| (*r).clone())
}

fn check_node(f: &F, memo: &mut HashMap<*const Formula, Rc<WfInfo>>) -> Result<Rc<WfInfo>, LogicError> {
    if let Some(r) = memo.get(&key(f)) {
        return Ok(r.clone());
    }
    let info = match &**f {
        Formula::Atom(a) => WfInfo { free: a.args.iter().cloned().collect(), gd: 0 },
        Formula::Eq(x, y) => WfInfo { free: [x.clone(), y.clone()].into_iter().collect(), gd: 0 },
        Formula::Not(g) => (*check_node(g, memo)?).clone(),
        Formula::And(g, h) => {
            let (a, b) = (check_node(g, memo)?, check_node(h, memo)?);
            WfInfo { free: a.free.union(&b.free).cloned().collect(), gd: a.gd.max(b.gd) }
        }
        Formula::CountExists { n, vars, guard, body } => {
            if *n == 0 {
                return Err(LogicError::ZeroCount);
            }
            let guard_vars: BTreeSet<Var> = guard.args.iter().cloned().collect();
            let mut seen = BTreeSet::new();
            for v in vars {
                if !seen.insert(v.clone()) {
                    return Err(LogicError::DuplicateVar(v.to_string()));
                }
                if !guard_vars.contains(v) {
                    return Err(LogicError::VarNotInGuard(v.to_string()));
                }
            }
            let b = check_node(body, memo)?;
            if let Some(v) = b.free.iter().find(|v| !guard_vars.contains(*v)) {
                return Err(LogicError::Unguarded(v.to_string()));
            }
            WfInfo { free: guard_vars.difference(&seen).cloned().collect(), gd: b.gd + 1 }
        }
    };
    let info = Rc::new(info);
    memo.insert(key(f), info.clone());
    Ok(info)
}

/// Checks relation symbols and arities against a signature.
pub fn check_signature(f: &F, sig: &crate::structure::Signature) -> Result<(), LogicError> {
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![f.clone()];
    let check = |a: &Atom| -> Result<(), LogicError> {
        let r = sig.lookup(&a.rel).ok_or_else(|| LogicError::UnknownSymbol(a.rel.clone()))?;
        if sig.arity(r) != a.args.len() {
            return Err(LogicError::ArityMismatch { rel: a.rel.clone(), expected: sig.arity(r), found: a.args.len() });
        }
        Ok(())
    };
    while let Some(g) = stack.pop() {
        if !seen.insert(key(&g)) {
            continue;
        }
        match &*g {
            Formula::Atom(a) => check(a)?,
            Formula::Eq(..) => {}
            Formula::Not(h) => stack.push(h.clone()),
            Formula::And(h, k) => {
                stack.push(h.clone());
                stack.push(k.clone());
            }
            Formula::CountExists { guard, body, .. } => {
                check(guard)?;
                stack.push(body.clone());
            }
        }
    }
    Ok(())
}

/// Number of distinct nodes.
pub fn dag_size(f: &F) -> usize {
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![f.clone()];
    while let Some(g) = stack.pop() {
        if !seen.insert(key(&g)) {
            continue;
        }
        match &*g {
            Formula::Not(h) => stack.push(h.clone()),
            Formula::And(h, k) => {
                stack.push(h.clone());
                stack.push(k.clone());
            }
            Formula::CountExists { body, .. } => stack.push(body.clone()),
            _ => {}
        }
    }
    seen.len()
}

/// Number of nodes of the formula written out as a tree, saturating.
pub fn tree_size(f: &F) -> u64 {
    fn go(f: &F, memo: &mut HashMap<*const Formula, u64>) -> u64 {
        if let Some(&s) = memo.get(&key(f)) {
            return s;
        }
        let s = match &**f {
            Formula::Atom(_) | Formula::Eq(..) => 1,
            Formula::Not(g) => go(g, memo).saturating_add(1),
            Formula::And(g, h) => go(g, memo).saturating_add(go(h, memo)).saturating_add(1),
            Formula::CountExists { body, .. } => go(body, memo).saturating_add(2),
        };
        memo.insert(key(f), s);
        s
    }
    go(f, &mut HashMap::new())
}
