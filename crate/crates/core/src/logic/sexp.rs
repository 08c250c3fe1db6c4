//! S-expression syntax for formulas.
//!
//! ```text
//! (atom R x y)
//! (eq x y)
//! (not f)
//! (and f g ...)                              right-nested
//! (geq N (vars y ...) (guard R ...) f)       ∃≥N; the body defaults to the guard
//! (exactly N (vars y ...) (guard R ...) f)   ∃=N
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{and_all, atom, count_exactly, count_geq, eq, not, tree_size, Atom, Formula, LogicError, Var, F};

#[derive(Debug)]
enum Sexp {
    Token(usize, String),
    List(usize, Vec<Sexp>),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Token(p, _) | Sexp::List(p, _) => *p,
        }
    }
}

fn err(pos: usize, message: impl Into<String>) -> LogicError {
    LogicError::Parse { pos, message: message.into() }
}

fn read(src: &str) -> Result<Sexp, LogicError> {
    let bytes = src.as_bytes();
    let mut stack: Vec<(usize, Vec<Sexp>)> = Vec::new();
    let mut done: Option<Sexp> = None;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if done.is_some() {
            return Err(err(i, "trailing input"));
        }
        let item = match c {
            b'(' => {
                stack.push((i, Vec::new()));
                i += 1;
                continue;
            }
            b')' => {
                let (p, items) = stack.pop().ok_or_else(|| err(i, "unbalanced `)`"))?;
                i += 1;
                Sexp::List(p, items)
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                    i += 1;
                }
                Sexp::Token(start, src[start..i].to_string())
            }
        };
        match stack.last_mut() {
            Some((_, items)) => items.push(item),
            None => done = Some(item),
        }
    }
    if let Some((p, _)) = stack.last() {
        return Err(err(*p, "unclosed `(`"));
    }
    done.ok_or_else(|| err(src.len(), "empty input"))
}

fn token(s: &Sexp) -> Result<&str, LogicError> {
    match s {
        Sexp::Token(_, t) => Ok(t),
        Sexp::List(p, _) => Err(err(*p, "expected a name")),
    }
}

fn var(s: &Sexp) -> Result<Var, LogicError> {
    token(s).map(Var::new)
}

/// `(head item ...)` with a fixed head keyword.
fn tagged<'a>(s: &'a Sexp, head: &str) -> Result<&'a [Sexp], LogicError> {
    match s {
        Sexp::List(_, items) if matches!(items.first(), Some(Sexp::Token(_, t)) if t == head) => Ok(&items[1..]),
        _ => Err(err(s.pos(), format!("expected `({head} ...)`"))),
    }
}

/// The arguments of `(atom R x ...)` or `(guard R x ...)`.
fn atom_of(s: &Sexp, items: &[Sexp]) -> Result<Atom, LogicError> {
    let (rel, args) = items.split_first().ok_or_else(|| err(s.pos(), "missing relation symbol"))?;
    Ok(Atom { rel: token(rel)?.to_string(), args: args.iter().map(var).collect::<Result<_, _>>()? })
}

fn formula(s: &Sexp) -> Result<F, LogicError> {
    let Sexp::List(p, items) = s else { return Err(err(s.pos(), "expected a formula")) };
    let (head, rest) = items.split_first().ok_or_else(|| err(*p, "empty list"))?;
    let arity_err = |n: &str| err(*p, format!("wrong number of arguments to `{n}`"));
    match token(head)? {
        "atom" => {
            let a = atom_of(s, rest)?;
            Ok(atom(&a.rel, &a.args))
        }
        "eq" => match rest {
            [x, y] => Ok(eq(&var(x)?, &var(y)?)),
            _ => Err(arity_err("eq")),
        },
        "not" => match rest {
            [f] => Ok(not(formula(f)?)),
            _ => Err(arity_err("not")),
        },
        "and" => {
            if rest.is_empty() {
                return Err(arity_err("and"));
            }
            Ok(and_all(rest.iter().map(formula).collect::<Result<_, _>>()?))
        }
        kw @ ("geq" | "exactly") => {
            let (n, vars, guard, body) = match rest {
                [n, vars, guard] => (n, vars, guard, None),
                [n, vars, guard, body] => (n, vars, guard, Some(body)),
                _ => return Err(arity_err(kw)),
            };
            let count: u64 = token(n)?.parse().map_err(|_| err(n.pos(), "expected a count"))?;
            let vars: Vec<Var> = tagged(vars, "vars")?.iter().map(var).collect::<Result<_, _>>()?;
            let guard = atom_of(guard, tagged(guard, "guard")?)?;
            let body = match body {
                Some(b) => formula(b)?,
                None => std::rc::Rc::new(Formula::Atom(guard.clone())),
            };
            if kw == "geq" {
                if count == 0 {
                    return Err(err(n.pos(), "count must be at least 1"));
                }
                Ok(count_geq(count, vars, guard, body))
            } else {
                Ok(count_exactly(count, vars, guard, body))
            }
        }
        other => Err(err(head.pos(), format!("unknown form `{other}`"))),
    }
}

pub fn parse_formula(src: &str) -> Result<F, LogicError> {
    formula(&read(src)?)
}

/// Prints `f` written out as a tree. Returns `None` when that tree has more
/// than `max_nodes` nodes, since sharing can make it exponentially large.
pub fn to_sexp(f: &F, max_nodes: u64) -> Option<String> {
    if tree_size(f) > max_nodes {
        return None;
    }
    let mut out = String::new();
    let mut cache = HashMap::new();
    write_formula(f, &mut out, &mut cache);
    Some(out)
}

fn write_atom(head: &str, a: &Atom, out: &mut String) {
    out.push('(');
    out.push_str(head);
    out.push(' ');
    out.push_str(&a.rel);
    for v in &a.args {
        out.push(' ');
        out.push_str(&v.0);
    }
    out.push(')');
}

fn write_block(kw: &str, n: u64, vars: &[Var], guard: &Atom, body: &F, out: &mut String, cache: &mut HashMap<*const Formula, String>) {
    let _ = write!(out, "({kw} {n} (vars");
    for v in vars {
        out.push(' ');
        out.push_str(&v.0);
    }
    out.push_str(") ");
    write_atom("guard", guard, out);
    out.push(' ');
    write_formula(body, out, cache);
    out.push(')');
}

/// Recognizes the two shapes produced by `count_exactly`.
fn as_exactly(f: &Formula) -> Option<(u64, &[Var], &Atom, &F)> {
    match f {
        Formula::Not(g) => match &**g {
            Formula::CountExists { n: 1, vars, guard, body } => Some((0, vars, guard, body)),
            _ => None,
        },
        Formula::And(g, h) => {
            let Formula::CountExists { n, vars, guard, body } = &**g else { return None };
            let Formula::Not(h) = &**h else { return None };
            let Formula::CountExists { n: n2, vars: v2, guard: g2, body: b2 } = &**h else { return None };
            (*n2 == n + 1 && v2 == vars && g2 == guard && std::rc::Rc::ptr_eq(b2, body)).then_some((*n, vars.as_slice(), guard, body))
        }
        _ => None,
    }
}

fn write_formula(f: &F, out: &mut String, cache: &mut HashMap<*const Formula, String>) {
    if let Some(s) = cache.get(&std::rc::Rc::as_ptr(f)) {
        out.push_str(s);
        return;
    }
    let start = out.len();
    if let Some((n, vars, guard, body)) = as_exactly(f) {
        write_block("exactly", n, vars, guard, body, out, cache);
    } else {
        match &**f {
            Formula::Atom(a) => write_atom("atom", a, out),
            Formula::Eq(x, y) => {
                let _ = write!(out, "(eq {x} {y})");
            }
            Formula::Not(g) => {
                out.push_str("(not ");
                write_formula(g, out, cache);
                out.push(')');
            }
            Formula::And(g, h) => {
                out.push_str("(and ");
                write_formula(g, out, cache);
                let mut rest = h;
                while let Formula::And(g2, h2) = &**rest {
                    if as_exactly(rest).is_some() {
                        break;
                    }
                    out.push(' ');
                    write_formula(g2, out, cache);
                    rest = h2;
                }
                out.push(' ');
                write_formula(rest, out, cache);
                out.push(')');
            }
            Formula::CountExists { n, vars, guard, body } => write_block("geq", *n, vars, guard, body, out, cache),
        }
    }
    let s = out[start..].to_string();
    cache.insert(std::rc::Rc::as_ptr(f), s);
}
