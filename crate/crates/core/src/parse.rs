//! Text and JSON encodings of structures.
//!
//! Text format:
//!
//! ```text
//! # comment
//! signature: E/2, R/6
//! universe: 1, 2, 3      # optional, fixes element order
//! E(1, 2)
//! R(1, 2, 3, u, v, w)
//! ```
//!
//! JSON format: `{"signature": [{"name": "E", "arity": 2}], "universe": [...],
//! "relations": {"E": [["1", "2"]]}}` with `universe` optional.

use serde_json::Value;

use crate::structure::{Signature, Structure, StructureBuilder, StructureError};

fn perr(line: usize, column: usize, message: impl Into<String>) -> StructureError {
    StructureError::Parse { line, column, message: message.into() }
}

fn is_name_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '(' | ')' | ',' | '#' | ':')
}

struct Cursor {
    line: usize,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Cursor {
    fn new(line: usize, src: &str) -> Self {
        Cursor { line, chars: src.char_indices().collect(), pos: 0 }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn expect(&mut self, want: char) -> Result<(), StructureError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(perr(self.line, self.column(), format!("expected `{want}`, found `{c}`"))),
            None => Err(perr(self.line, self.column(), format!("expected `{want}`, found end of line"))),
        }
    }

    fn name(&mut self) -> Result<(String, usize), StructureError> {
        self.skip_ws();
        let col = self.column();
        let start = self.pos;
        while self.pos < self.chars.len() && is_name_char(self.chars[self.pos].1) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(perr(self.line, col, "expected a name"));
        }
        Ok((self.chars[start..self.pos].iter().map(|&(_, c)| c).collect(), col))
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_signature_line(line_no: usize, rest: &str, offset: usize) -> Result<Signature, StructureError> {
    let mut symbols = Vec::new();
    for part in rest.split(',') {
        let part_trim = part.trim();
        if part_trim.is_empty() {
            continue;
        }
        let (name, arity) = part_trim
            .split_once('/')
            .ok_or_else(|| perr(line_no, offset, format!("expected NAME/ARITY, found `{part_trim}`")))?;
        let arity: usize = arity
            .trim()
            .parse()
            .map_err(|_| perr(line_no, offset, format!("bad arity in `{part_trim}`")))?;
        symbols.push((name.trim().to_string(), arity));
    }
    Signature::new(symbols).map_err(|e| perr(line_no, offset, e.to_string()))
}

/// Parses a symbol list such as `E/2, R/3`.
pub fn parse_signature(src: &str) -> Result<Signature, StructureError> {
    parse_signature_line(1, src, 1)
}

/// Parses the text format.
pub fn parse_structure(src: &str, pad_universe: bool) -> Result<Structure, StructureError> {
    let mut builder: Option<StructureBuilder> = None;
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        if let Some(rest) = trimmed.strip_prefix("signature:") {
            if builder.is_some() {
                return Err(perr(line_no, indent + 1, "signature declared twice"));
            }
            builder = Some(StructureBuilder::new(parse_signature_line(line_no, rest, indent + 11)?));
            continue;
        }
        let b = builder
            .as_mut()
            .ok_or_else(|| perr(line_no, indent + 1, "expected `signature:` before facts"))?;
        if let Some(rest) = trimmed.strip_prefix("universe:") {
            for name in rest.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                b.elem(name);
            }
            continue;
        }
        let mut cur = Cursor::new(line_no, line);
        let (rel, col) = cur.name()?;
        let r = b
            .signature()
            .lookup(&rel)
            .ok_or_else(|| perr(line_no, col, format!("unknown relation symbol `{rel}`")))?;
        cur.expect('(')?;
        let mut args = Vec::new();
        if cur.peek() != Some(')') {
            loop {
                args.push(cur.name()?.0);
                match cur.peek() {
                    Some(',') => cur.pos += 1,
                    _ => break,
                }
            }
        }
        cur.expect(')')?;
        if !cur.at_end() {
            return Err(perr(line_no, cur.column(), "trailing input after fact"));
        }
        let arity = b.signature().arity(r);
        if args.len() != arity {
            return Err(perr(
                line_no,
                col,
                format!("relation `{rel}` expects {arity} arguments, got {}", args.len()),
            ));
        }
        let ids = args.iter().map(|a| b.elem(a)).collect();
        b.fact_ids(r, ids)?;
    }
    let b = builder.ok_or_else(|| perr(1, 1, "missing `signature:` line"))?;
    b.build(pad_universe)
}

/// Serializes to the text format. `parse_structure(&serialize(a))` returns
/// a structure equal to `a`, element ids included.
pub fn serialize_structure(a: &Structure) -> String {
    let mut out = format!("signature: {}\n", a.signature());
    out.push_str("universe: ");
    out.push_str(&a.elem_names().join(", "));
    out.push('\n');
    for rel in a.signature().rel_ids() {
        for t in a.relation(rel) {
            let args: Vec<&str> = t.iter().map(|&e| a.elem_name(e)).collect();
            out.push_str(&format!("{}({})\n", a.signature().name(rel), args.join(", ")));
        }
    }
    out
}

fn json_name(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn jerr(message: impl Into<String>) -> StructureError {
    perr(0, 0, message)
}

/// Parses the JSON format.
pub fn parse_structure_json(src: &str, pad_universe: bool) -> Result<Structure, StructureError> {
    let doc: Value = serde_json::from_str(src).map_err(|e| perr(e.line(), e.column(), e.to_string()))?;
    let sig = doc
        .get("signature")
        .and_then(Value::as_array)
        .ok_or_else(|| jerr("missing `signature` array"))?;
    let mut symbols = Vec::new();
    for s in sig {
        let name = s.get("name").and_then(Value::as_str).ok_or_else(|| jerr("symbol without `name`"))?;
        let arity = s.get("arity").and_then(Value::as_u64).ok_or_else(|| jerr("symbol without `arity`"))?;
        symbols.push((name.to_string(), arity as usize));
    }
    let mut b = StructureBuilder::new(Signature::new(symbols)?);
    if let Some(universe) = doc.get("universe").and_then(Value::as_array) {
        for v in universe {
            b.elem(&json_name(v).ok_or_else(|| jerr("universe entries must be strings or numbers"))?);
        }
    }
    let rels = doc
        .get("relations")
        .and_then(Value::as_object)
        .ok_or_else(|| jerr("missing `relations` object"))?;
    for (name, tuples) in rels {
        let r = b.signature().lookup(name).ok_or_else(|| StructureError::UnknownSymbol(name.clone()))?;
        let tuples = tuples.as_array().ok_or_else(|| jerr(format!("`{name}` must be an array")))?;
        for t in tuples {
            let t = t.as_array().ok_or_else(|| jerr(format!("`{name}` tuples must be arrays")))?;
            let mut ids = Vec::with_capacity(t.len());
            for v in t {
                ids.push(b.elem(&json_name(v).ok_or_else(|| jerr("elements must be strings or numbers"))?));
            }
            b.fact_ids(r, ids)?;
        }
    }
    b.build(pad_universe)
}

pub fn serialize_structure_json(a: &Structure) -> String {
    let sig: Vec<Value> = a
        .signature()
        .symbols()
        .iter()
        .map(|s| serde_json::json!({"name": s.name, "arity": s.arity}))
        .collect();
    let mut rels = serde_json::Map::new();
    for rel in a.signature().rel_ids() {
        let tuples: Vec<Value> = a
            .relation(rel)
            .iter()
            .map(|t| Value::Array(t.iter().map(|&e| Value::String(a.elem_name(e).to_string())).collect()))
            .collect();
        rels.insert(a.signature().name(rel).to_string(), Value::Array(tuples));
    }
    let doc = serde_json::json!({
        "signature": sig,
        "universe": a.elem_names(),
        "relations": rels,
    });
    serde_json::to_string_pretty(&doc).expect("json serialization")
}

#[cfg(test)]
mod tests {
    use super::*;

    const A1: &str = "signature: E/2, R/6\nE(1,2)\nE(2,3)\nE(3,1)\nE(u,v)\nE(v,w)\nE(w,u)\nR(1,2,3,u,v,w)\n";

    #[test]
    fn round_trip_text_and_json() {
        let a = parse_structure(A1, false).unwrap();
        assert_eq!(a.size(), 7);
        assert_eq!(parse_structure(&serialize_structure(&a), false).unwrap(), a);
        assert_eq!(parse_structure_json(&serialize_structure_json(&a), false).unwrap(), a);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_structure("signature: E/2\nE(1,2)\n  F(1)\n", false).unwrap_err();
        assert_eq!(e, StructureError::Parse { line: 3, column: 3, message: "unknown relation symbol `F`".into() });
        let e = parse_structure("signature: E/2\nE(1,2,3)\n", false).unwrap_err();
        assert!(matches!(e, StructureError::Parse { line: 2, column: 1, .. }));
        let e = parse_structure("signature: E/2\nuniverse: 1, 2, 9\nE(1,2)\n", false).unwrap_err();
        assert_eq!(e, StructureError::UncoveredElement("9".into()));
    }

    #[test]
    fn pad_universe_adds_fresh_unary_relation() {
        let a = parse_structure("signature: E/2, U/1\nuniverse: 1, 2, 9\nE(1,2)\n", true).unwrap();
        let pad = a.signature().lookup("U_").unwrap();
        assert_eq!(a.relation(pad).len(), 3);
    }

    #[test]
    fn comments_and_blank_lines() {
        let a = parse_structure("# header\n\nsignature: E/2 # sig\nE(a, b) # fact\n", false).unwrap();
        assert_eq!(a.universe_size(), 2);
    }
}
