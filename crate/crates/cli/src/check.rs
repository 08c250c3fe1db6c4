//! The property suite behind `relcr check`. Each property draws its cases
//! from its own seed; a failing case writes its inputs to the output
//! directory so it can be replayed with the other subcommands.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use relcr::acyclic::random_acyclic;
use relcr::cr::{canonical_partition, cr_run, CrOptions};
use relcr::game::{round_bound, spoiler_wins};
use relcr::gen::{random_signature, random_structure, rng};
use relcr::homcount::{hom_acyclic, hom_bruteforce, hom_multigraph};
use relcr::logic::{distinguishing_sentence, evaluate_sentence, DEFAULT_NODE_BUDGET};
use relcr::parse::serialize_structure;
use relcr::representations::{grep, jtrep, vgrep};
use relcr::structure::Side;
use relcr::{rcr_distinguishes, rcr_run, JointRun, Structure};

#[derive(Serialize)]
pub struct PropertyReport {
    pub name: &'static str,
    pub seed: u64,
    pub cases: usize,
    pub failures: Vec<Failure>,
}

#[derive(Serialize)]
pub struct Failure {
    pub case: usize,
    pub message: String,
    pub files: Vec<String>,
}

/// A failing case: a message plus the structures that reproduce it.
type Outcome = Result<(), (String, Vec<(&'static str, String)>)>;

type Property = fn(&mut ChaCha8Rng) -> Outcome;

const PROPERTIES: [(&str, Property); 4] = [
    ("rcr-matches-cr-on-vgrep", rcr_vs_vgrep),
    ("hom-join-tree-identity", hom_identity),
    ("rcr-game-logic-agree", three_way),
    ("hom-separation-implies-rcr", hom_forward),
];

pub fn run_suite(cases: usize, seed: u64, out: &Path) -> Result<Vec<PropertyReport>> {
    let mut reports = Vec::new();
    for (k, (name, prop)) in PROPERTIES.iter().enumerate() {
        let seed = seed.wrapping_add(k as u64);
        let mut r = rng(seed);
        let mut failures = Vec::new();
        for case in 0..cases {
            if let Err((message, inputs)) = prop(&mut r) {
                fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
                let mut files = Vec::new();
                for (label, text) in inputs {
                    let path = out.join(format!("{name}-seed{seed}-case{case}-{label}.struct"));
                    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
                    files.push(path.display().to_string());
                }
                failures.push(Failure { case, message, files });
            }
        }
        reports.push(PropertyReport { name, seed, cases, failures });
    }
    Ok(reports)
}

fn small<R: Rng>(r: &mut R, max_facts: usize) -> Structure {
    let sig = random_signature(r.gen_range(1..=3), 3, r);
    let facts = r.gen_range(1..=max_facts);
    random_structure(&sig, r.gen_range(2..=facts + 2), facts, 0.2, r)
}

/// A pair over one signature. Half the time `B` reuses the relation sizes
/// of `A` so size alone does not separate them.
fn pair<R: Rng>(r: &mut R) -> (Structure, Structure) {
    let sig = random_signature(r.gen_range(1..=2), 3, r);
    let a = random_structure(&sig, r.gen_range(2..=5), r.gen_range(1..=5), 0.2, r);
    let facts = if r.gen_bool(0.5) { a.size() } else { r.gen_range(1..=5) };
    let b = random_structure(&sig, r.gen_range(2..=5), facts, 0.2, r);
    (a, b)
}

fn files(items: &[(&'static str, &Structure)]) -> Vec<(&'static str, String)> {
    items.iter().map(|(l, s)| (*l, serialize_structure(s))).collect()
}

fn rcr_vs_vgrep(r: &mut ChaCha8Rng) -> Outcome {
    let a = small(r, 20);
    let run = rcr_run(&a, None);
    let cr = cr_run(&vgrep(&a), CrOptions { max_rounds: None, trace: true });
    let n = a.size();
    for i in 0..run.rounds() {
        let x = canonical_partition(run.round(i).iter().map(|c| c.0));
        let y = canonical_partition(cr.colors(2 * i + 1)[..n].iter().copied());
        if x != y {
            return Err((format!("RCR round {i} differs from CR round {}", 2 * i + 1), files(&[("A", &a)])));
        }
    }
    Ok(())
}

fn hom_identity(r: &mut ChaCha8Rng) -> Outcome {
    let a = small(r, 8);
    let (c, j) = random_acyclic(a.signature(), r.gen_range(1..=4), r);
    let fail = |m: String| (m, files(&[("C", &c), ("A", &a)]));
    let brute = hom_bruteforce(&c, &a).map_err(|e| fail(e.to_string()))?;
    let graph = hom_multigraph(&jtrep(&c, &j), &grep(&a)).map_err(|e| fail(e.to_string()))?;
    let dp = hom_acyclic(&c, &j, &a).map_err(|e| fail(e.to_string()))?;
    if brute != graph || brute != dp {
        return Err(fail(format!("brute force {brute}, representation {graph}, join tree {dp}")));
    }
    Ok(())
}

fn three_way(r: &mut ChaCha8Rng) -> Outcome {
    let (a, b) = pair(r);
    let fail = |m: String| (m, files(&[("A", &a), ("B", &b)]));
    let rcr = rcr_distinguishes(&a, &b).map_err(|e| fail(e.to_string()))?.is_some();
    let game = spoiler_wins(&a, &b, round_bound(&a, &b), &[], &[]);
    let joint = JointRun::new(&a, &b).map_err(|e| fail(e.to_string()))?;
    let sentence = distinguishing_sentence(&joint, DEFAULT_NODE_BUDGET).ok();
    if rcr != game || rcr != sentence.is_some() {
        return Err(fail(format!("rcr {rcr}, spoiler {game}, sentence {}", sentence.is_some())));
    }
    if let Some(s) = sentence {
        let ea = evaluate_sentence(&a, &s.formula).map_err(|e| fail(e.to_string()))?;
        let eb = evaluate_sentence(&b, &s.formula).map_err(|e| fail(e.to_string()))?;
        if ea != (s.holds_in == Side::Left) || eb != (s.holds_in == Side::Right) {
            return Err(fail(format!("sentence evaluates to {ea} on A and {eb} on B")));
        }
    }
    Ok(())
}

fn hom_forward(r: &mut ChaCha8Rng) -> Outcome {
    let (a, b) = pair(r);
    let (c, j) = random_acyclic(a.signature(), r.gen_range(1..=5), r);
    let fail = |m: String| (m, files(&[("A", &a), ("B", &b), ("C", &c)]));
    let ha = hom_acyclic(&c, &j, &a).map_err(|e| fail(e.to_string()))?;
    let hb = hom_acyclic(&c, &j, &b).map_err(|e| fail(e.to_string()))?;
    if ha != hb && rcr_distinguishes(&a, &b).map_err(|e| fail(e.to_string()))?.is_none() {
        return Err(fail(format!("hom counts {ha} and {hb} differ but RCR does not separate")));
    }
    Ok(())
}
