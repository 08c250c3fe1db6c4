//! Model checking with guarded enumeration.
//!
//! A quantifier block only ranges over tuples of its guard relation that
//! agree with the current assignment, never over `V^k`. Quantifier nodes are
//! memoized on the values of their free variables.

use std::collections::HashMap;

use super::{check_node, Formula, LogicError, Var, WfInfo, F};
use crate::structure::{Elem, Structure};

pub struct Evaluator<'s> {
    s: &'s Structure,
    wf: HashMap<*const Formula, std::rc::Rc<WfInfo>>,
    memo: HashMap<(*const Formula, Vec<Elem>), bool>,
    env: HashMap<Var, Elem>,
}

impl<'s> Evaluator<'s> {
    pub fn new(s: &'s Structure) -> Self {
        Evaluator { s, wf: HashMap::new(), memo: HashMap::new(), env: HashMap::new() }
    }

    /// Evaluates `f` under `assignment`. The formula must be well formed and
    /// the assignment must cover its free variables.
    pub fn eval(&mut self, f: &F, assignment: &HashMap<Var, Elem>) -> Result<bool, LogicError> {
        super::check_signature(f, self.s.signature())?;
        check_node(f, &mut self.wf)?;
        self.env = assignment.clone();
        self.go(f)
    }

    fn lookup(&self, v: &Var) -> Result<Elem, LogicError> {
        self.env.get(v).copied().ok_or_else(|| LogicError::Unbound(v.to_string()))
    }

    fn go(&mut self, f: &F) -> Result<bool, LogicError> {
        match &**f {
            Formula::Atom(a) => {
                let rel = self.s.signature().lookup(&a.rel).ok_or_else(|| LogicError::UnknownSymbol(a.rel.clone()))?;
                let t = a.args.iter().map(|v| self.lookup(v)).collect::<Result<Vec<_>, _>>()?;
                Ok(self.s.contains(rel, &t))
            }
            Formula::Eq(x, y) => Ok(self.lookup(x)? == self.lookup(y)?),
            Formula::Not(g) => Ok(!self.go(g)?),
            Formula::And(g, h) => Ok(self.go(g)? && self.go(h)?),
            Formula::CountExists { n, vars, guard, body } => {
                let info = match self.wf.get(&Rc::as_ptr(f)) {
                    Some(i) => i.clone(),
                    None => check_node(f, &mut self.wf)?,
                };
                let bound = info.free.iter().map(|v| self.lookup(v)).collect::<Result<Vec<_>, _>>()?;
                let memo_key = (Rc::as_ptr(f), bound);
                if let Some(&r) = self.memo.get(&memo_key) {
                    return Ok(r);
                }
                let rel = self.s.signature().lookup(&guard.rel).ok_or_else(|| LogicError::UnknownSymbol(guard.rel.clone()))?;
                // Position of each guard argument: Some(q) for the q-th quantified
                // variable, None for a free one.
                let slots: Vec<Option<usize>> = guard.args.iter().map(|a| vars.iter().position(|v| v == a)).collect();
                let fixed: Vec<Option<Elem>> = guard
                    .args
                    .iter()
                    .zip(&slots)
                    .map(|(a, s)| match s {
                        Some(_) => Ok(None),
                        None => self.lookup(a).map(Some),
                    })
                    .collect::<Result<_, _>>()?;
                let saved: Vec<Option<Elem>> = vars.iter().map(|v| self.env.get(v).copied()).collect();
                let mut count = 0u64;
                let mut values: Vec<Option<Elem>> = vec![None; vars.len()];
                for t in self.s.relation(rel) {
                    values.iter_mut().for_each(|x| *x = None);
                    let consistent = t.iter().zip(&slots).zip(&fixed).all(|((&e, slot), fix)| match (slot, fix) {
                        (None, Some(x)) => *x == e,
                        (Some(q), _) => match values[*q] {
                            Some(x) => x == e,
                            None => {
                                values[*q] = Some(e);
                                true
                            }
                        },
                        (None, None) => unreachable!(),
                    });
                    if !consistent {
                        continue;
                    }
                    for (v, x) in vars.iter().zip(&values) {
                        self.env.insert(v.clone(), x.expect("quantified variable occurs in guard"));
                    }
                    if self.go(body)? {
                        count += 1;
                        if count >= *n {
                            break;
                        }
                    }
                }
                for (v, old) in vars.iter().zip(saved) {
                    match old {
                        Some(x) => self.env.insert(v.clone(), x),
                        None => self.env.remove(v),
                    };
                }
                let r = count >= *n;
                self.memo.insert(memo_key, r);
                Ok(r)
            }
        }
    }
}

use std::rc::Rc;

pub fn evaluate(s: &Structure, f: &F, assignment: &HashMap<Var, Elem>) -> Result<bool, LogicError> {
    Evaluator::new(s).eval(f, assignment)
}

pub fn evaluate_sentence(s: &Structure, f: &F) -> Result<bool, LogicError> {
    evaluate(s, f, &HashMap::new())
}
