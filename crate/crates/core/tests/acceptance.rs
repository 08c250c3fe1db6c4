//! Acceptance criteria. Each test prints one `PASS` or `FAIL` line with its
//! timing.
//!
//! Tests hold a global lock so timings are not skewed by each other.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::io::Write as _;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::Rng;
use relcr::acyclic::{gyo_join_tree, random_acyclic};
use relcr::cr::{cr_distinguishes, cr_run, CrOptions};
use relcr::game::{round_bound, spoiler_wins};
use relcr::gen::{random_signature, random_structure, rng};
use relcr::homcount::{find_separator, hom_acyclic, hom_bruteforce, hom_multigraph};
use relcr::logic::{distinguishing_sentence, evaluate, evaluate_sentence, Synthesizer, DEFAULT_NODE_BUDGET};
use relcr::rcr::{rcr_distinguishes, rcr_run, JointRun};
use relcr::representations::{enriched_gaifman, enriched_incidence, grep, jtrep, vgrep};
use relcr::slices::{all_slices, slice_bijection, slices};
use relcr::structure::{Side, Structure};
use relcr::types::SimType;

use common::*;

static LOCK: Mutex<()> = Mutex::new(());

// Time limits per criterion.
const LIMIT_FIXTURE: Duration = Duration::from_secs(1);
const LIMIT_HOM_FIXTURE: Duration = Duration::from_secs(5);
const LIMIT_HOM_IDENTITY: Duration = Duration::from_secs(60);
const LIMIT_VGREP: Duration = Duration::from_secs(120);
const LIMIT_GREP: Duration = Duration::from_secs(60);
const LIMIT_THREE_WAY: Duration = Duration::from_secs(600);
const LIMIT_SYNTH: Duration = Duration::from_secs(600);
const LIMIT_HOM_FORWARD: Duration = Duration::from_secs(600);
const LIMIT_SCALING: Duration = Duration::from_secs(300);
const LIMIT_SLICES: Duration = Duration::from_secs(30);

/// Largest allowed `t(2N) / t(N)` on the scaling ladder.
const SCALING_RATIO: f64 = 2.6;
/// Smallest converse hit rate for the separator search.
const CONVERSE_HIT_RATE: f64 = 0.9;

fn run(id: u32, name: &str, limit: Duration, check: impl FnOnce() -> Result<String, String>) {
    let _guard = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
        other => other,
    };
    // Written to the handle directly so the line shows up without
    // `--nocapture`.
    let line = match &outcome {
        Ok(detail) => format!("PASS {id:>2} {name}: {detail} ({elapsed:.2?})\n"),
        Err(why) => format!("FAIL {id:>2} {name}: {why} ({elapsed:.2?})\n"),
    };
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    if let Err(why) = outcome {
        panic!("criterion {id} failed: {why}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[test]
fn c01_running_example_round_one() {
    run(1, "A1/B1 distinguished in round 1", LIMIT_FIXTURE, || {
        let (a, b) = (fixture("A1.struct"), fixture("B1.struct"));
        let joint = JointRun::new(&a, &b).map_err(|e| e.to_string())?;
        let d = joint.first_difference().ok_or("not distinguished")?;
        ensure(d.round == 1, || format!("distinguished in round {}", d.round))?;
        for side in [Side::Left, Side::Right] {
            let h0: Vec<usize> = joint.side_histogram(0, side).into_values().collect();
            let mut sorted = h0.clone();
            sorted.sort_unstable();
            ensure(sorted == [1, 6], || format!("round-0 histogram {h0:?} on {side:?}"))?;
        }
        // Each side's own run: all seven tuples get their own color.
        for s in [&a, &b] {
            let r = rcr_run(s, None);
            ensure(r.class_count(1) == 7, || format!("{} classes after round 1", r.class_count(1)))?;
        }
        Ok("round-0 histogram {6, 1} on both sides, 7 singletons after round 1".into())
    });
}

#[test]
fn c02_enriched_baselines_fail() {
    run(2, "A2/B2 separated by RCR but not by enriched CR", LIMIT_FIXTURE, || {
        let (a, b) = (fixture("A2.struct"), fixture("B2.struct"));
        let d = rcr_distinguishes(&a, &b).map_err(|e| e.to_string())?.ok_or("RCR does not distinguish")?;
        let eg = cr_distinguishes(&enriched_gaifman(&a), &enriched_gaifman(&b)).map_err(|e| e.to_string())?;
        ensure(eg.is_none(), || format!("CR separates the enriched Gaifman graphs in round {eg:?}"))?;
        let ei = cr_distinguishes(&enriched_incidence(&a), &enriched_incidence(&b)).map_err(|e| e.to_string())?;
        ensure(ei.is_none(), || format!("CR separates the enriched incidence graphs in round {ei:?}"))?;
        Ok(format!("RCR in round {}, both enriched representations stay equal", d.round))
    });
}

#[test]
fn c03_running_example_hom_counts() {
    run(3, "hom(A1,B1) = 0 and hom(A1,A1) >= 1", LIMIT_HOM_FIXTURE, || {
        let (a, b) = (fixture("A1.struct"), fixture("B1.struct"));
        let j = gyo_join_tree(&a).ok_or("A1 has no join tree")?;
        let zero = BigUint::from(0u32);
        let ab = (hom_bruteforce(&a, &b).map_err(|e| e.to_string())?, hom_acyclic(&a, &j, &b).map_err(|e| e.to_string())?);
        let aa = (hom_bruteforce(&a, &a).map_err(|e| e.to_string())?, hom_acyclic(&a, &j, &a).map_err(|e| e.to_string())?);
        ensure(ab.0 == zero && ab.1 == zero, || format!("hom(A1,B1) = {} / {}", ab.0, ab.1))?;
        ensure(aa.0 == aa.1 && aa.0 > zero, || format!("hom(A1,A1) = {} / {}", aa.0, aa.1))?;
        Ok(format!("hom(A1,A1) = {} by both methods", aa.0))
    });
}

#[test]
fn c04_join_tree_representation_counts() {
    run(4, "hom via brute force, jtrep into grep and join-tree DP agree", LIMIT_HOM_IDENTITY, || {
        let mut r = rng(4);
        for case in 0..300 {
            let sig = random_signature(r.gen_range(1..=3), 3, &mut r);
            let a = random_structure(&sig, r.gen_range(2..=8), r.gen_range(1..=8), 0.2, &mut r);
            let (c, j) = random_acyclic(&sig, r.gen_range(1..=4), &mut r);
            let brute = hom_bruteforce(&c, &a).map_err(|e| e.to_string())?;
            let graph = hom_multigraph(&jtrep(&c, &j), &grep(&a)).map_err(|e| e.to_string())?;
            let dp = hom_acyclic(&c, &j, &a).map_err(|e| e.to_string())?;
            ensure(brute == graph && graph == dp, || format!("case {case}: {brute} / {graph} / {dp}"))?;
        }
        Ok("300 cases, 0 mismatches".into())
    });
}

/// `w`-node partition of CR on `vgrep(A)` at round `2i + 1` against RCR at
/// round `i`, for every `i` up to stability of both.
fn vgrep_mismatch(a: &Structure) -> Option<usize> {
    let run = rcr_run(a, None);
    let g = vgrep(a);
    let cr = cr_run(&g, CrOptions { max_rounds: None, trace: true });
    let n = a.size();
    let last = run.rounds().max(cr.computed_rounds() / 2 + 1);
    (0..=last).find(|&i| !same_partition(&cr.colors(2 * i + 1)[..n], &rcr_partition(&run, i)))
}

#[test]
fn c05_vgrep_tracks_rcr() {
    run(5, "RCR round i equals CR on vgrep round 2i+1", LIMIT_VGREP, || {
        let mut r = rng(5);
        for case in 0..500 {
            let sig = random_signature(r.gen_range(1..=3), 4, &mut r);
            let facts = r.gen_range(1..=30);
            let a = random_structure(&sig, r.gen_range(2..=facts + 2), facts, 0.2, &mut r);
            if let Some(i) = vgrep_mismatch(&a) {
                return Err(format!("case {case}: round {i} differs"));
            }
        }
        Ok("500 structures, 0 mismatches".into())
    });
}

#[test]
fn c06_grep_and_plain_graphs() {
    run(6, "RCR equals CR on grep; graph encoding equals textbook CR", LIMIT_GREP, || {
        let mut r = rng(5);
        for case in 0..500 {
            let sig = random_signature(r.gen_range(1..=3), 4, &mut r);
            let facts = r.gen_range(1..=30);
            let a = random_structure(&sig, r.gen_range(2..=facts + 2), facts, 0.2, &mut r);
            let run = rcr_run(&a, None);
            let cr = cr_run(&grep(&a), CrOptions { max_rounds: None, trace: true });
            let rounds = run.rounds().max(cr.computed_rounds());
            if let Some(i) = (0..rounds).find(|&i| !same_partition(cr.colors(i), &rcr_partition(&run, i))) {
                return Err(format!("grep case {case}: round {i} differs"));
            }
        }
        let mut r = rng(6);
        for case in 0..200 {
            let adj = random_graph(&mut r, 25);
            let s = graph_structure(&adj);
            let run = rcr_run(&s, None);
            let last = run.rounds() - 1;
            let u = s.signature().lookup("U").expect("U in signature");
            // U-tuples in vertex order.
            let colors: Vec<u32> = (0..adj.len())
                .map(|v| {
                    let e = s.elem_by_name(&v.to_string()).expect("vertex");
                    let t = s.tup_id(&[e]).expect("U tuple");
                    debug_assert!(s.tup(t).atp.contains(&u));
                    run.color(last, t).0
                })
                .collect();
            ensure(same_partition(&colors, &graph_cr(&adj)), || format!("graph case {case} ({} vertices)", adj.len()))?;
        }
        Ok("500 grep runs and 200 graphs, 0 mismatches".into())
    });
}

/// Random pair with at most 6 tuples per side and relation sizes at most 5.
/// Half the pairs share all relation sizes so the game has to work.
fn tiny_pair<R: Rng>(r: &mut R) -> (Structure, Structure) {
    loop {
        let sig = random_signature(r.gen_range(1..=2), 3, r);
        let a = random_structure(&sig, r.gen_range(2..=6), r.gen_range(1..=6), 0.2, r);
        let b = if r.gen_bool(0.5) {
            strict_size_twin(&a, r)
        } else {
            random_structure(&sig, r.gen_range(2..=6), r.gen_range(1..=6), 0.2, r)
        };
        let small = |s: &Structure| s.size() <= 6 && s.relation_sizes().iter().all(|&n| n <= 5);
        if small(&a) && small(&b) {
            return (a, b);
        }
    }
}

#[test]
fn c07_three_way_agreement() {
    run(7, "RCR, game and logic agree", LIMIT_THREE_WAY, || {
        let mut r = rng(7);
        let mut separated = 0;
        for case in 0..200 {
            let (a, b) = tiny_pair(&mut r);
            let rcr = rcr_distinguishes(&a, &b).map_err(|e| e.to_string())?.is_some();
            let game = spoiler_wins(&a, &b, round_bound(&a, &b), &[], &[]);
            let joint = JointRun::new(&a, &b).map_err(|e| e.to_string())?;
            let sentence = distinguishing_sentence(&joint, DEFAULT_NODE_BUDGET).ok();
            ensure(rcr == game && rcr == sentence.is_some(), || {
                format!("case {case}: rcr {rcr}, spoiler {game}, sentence {}", sentence.is_some())
            })?;
            if let Some(s) = sentence {
                let (ea, eb) = (evaluate_sentence(&a, &s.formula).map_err(|e| e.to_string())?, evaluate_sentence(&b, &s.formula).map_err(|e| e.to_string())?);
                let want = s.holds_in == Side::Left;
                ensure(ea == want && eb == !want, || format!("case {case}: sentence gives {ea} on A, {eb} on B"))?;
                separated += 1;
            }
        }
        Ok(format!("200 pairs ({separated} separated), 0 violations"))
    });
}

#[test]
fn c08_color_formulas() {
    run(8, "synthesized color formulas match joint-run colors", LIMIT_SYNTH, || {
        let mut r = rng(8);
        let mut checked = 0usize;
        for case in 0..200 {
            let sig = random_signature(r.gen_range(1..=2), 3, &mut r);
            let a = random_structure(&sig, r.gen_range(2..=6), r.gen_range(1..=6), 0.2, &mut r);
            let b = strict_size_twin(&a, &mut r);
            let joint = JointRun::new(&a, &b).map_err(|e| e.to_string())?;
            let run = &joint.run;
            let round = r.gen_range(0..run.rounds());
            let colors: Vec<_> = {
                let h = joint.side_histogram(round, Side::Left);
                h.into_keys().collect()
            };
            let c = colors[r.gen_range(0..colors.len())];
            let mut s = Synthesizer::new(run, joint.union.structure.signature());
            let phi = s.color_formula(c).map_err(|e| e.to_string())?;
            let vars = s.free_vars(run.interner.info(c).arity);
            for t in joint.union.structure.tup_ids() {
                let elems = &joint.union.structure.tup(t).elems;
                if elems.len() != vars.len() {
                    continue;
                }
                let (side, target) = match joint.union.tup_side(t) {
                    Side::Left => (Side::Left, &a),
                    Side::Right => (Side::Right, &b),
                };
                let local: Vec<u32> = elems.iter().map(|&e| joint.union.project(e).1).collect();
                let env: Assignment = vars.iter().cloned().zip(local.iter().copied()).collect();
                let got = evaluate(target, &phi, &env).map_err(|e| e.to_string())?;
                let want = run.color(round, t) == c;
                ensure(got == want, || format!("case {case}: round {round}, {side:?} tuple {local:?} gives {got}"))?;
                checked += 1;
            }
        }
        Ok(format!("200 formulas over {checked} tuple evaluations, 0 mismatches"))
    });
}

#[test]
fn c09_hom_counts_and_rcr() {
    run(9, "hom-count separations imply RCR separation", LIMIT_HOM_FORWARD, || {
        let mut r = rng(9);
        let mut found = 0;
        let mut tries = 0;
        while found < 100 {
            tries += 1;
            ensure(tries < 100_000, || format!("only {found} separating cases generated"))?;
            let (a, b) = tiny_pair(&mut r);
            if a.size() > 5 || b.size() > 5 {
                continue;
            }
            let (c, j) = random_acyclic(a.signature(), r.gen_range(1..=5), &mut r);
            let (ha, hb) = (hom_acyclic(&c, &j, &a).map_err(|e| e.to_string())?, hom_acyclic(&c, &j, &b).map_err(|e| e.to_string())?);
            if ha == hb {
                continue;
            }
            found += 1;
            ensure(rcr_distinguishes(&a, &b).map_err(|e| e.to_string())?.is_some(), || format!("pair {found}: hom {ha} vs {hb} but RCR agrees"))?;
        }

        // Converse: budgeted search for a separating acyclic structure.
        let mut pairs = 0;
        let mut hits = 0;
        let mut misses = Vec::new();
        while pairs < 100 {
            let (a, b) = tiny_pair(&mut r);
            if a.size() > 5 || b.size() > 5 || rcr_distinguishes(&a, &b).map_err(|e| e.to_string())?.is_none() {
                continue;
            }
            pairs += 1;
            match find_separator(&a, &b, 8, 300, &mut r) {
                Some(_) => hits += 1,
                None => misses.push(pairs),
            }
        }
        for m in &misses {
            let _ = writeln!(std::io::stdout().lock(), "   converse search miss on distinguished pair {m}");
        }
        let rate = hits as f64 / pairs as f64;
        ensure(rate >= CONVERSE_HIT_RATE, || format!("converse hit rate {rate:.2} below {CONVERSE_HIT_RATE}"))?;
        Ok(format!("100 separations, 0 violations; converse hit rate {rate:.2} ({} misses)", misses.len()))
    });
}

/// Fixed signature used by the scaling check.
fn scaling_input(n: usize, seed: u64) -> Structure {
    let sig = relcr::structure::Signature::new([("E", 2), ("T", 3), ("P", 1)]).expect("valid");
    random_structure(&sig, n, n, 0.1, &mut rng(seed))
}

#[test]
fn c10_scaling() {
    run(10, "vgrep + CR scales like N log N", LIMIT_SCALING, || {
        const LADDER: [usize; 7] = [1_000, 2_000, 4_000, 8_000, 16_000, 32_000, 64_000];
        // Enough repetitions that each size gets about the same total time.
        let reps = |n: usize| 7 * (64_000 / n).max(1);
        let time = |a: &Structure| {
            let t = Instant::now();
            let run = cr_run(&vgrep(a), CrOptions::default());
            std::hint::black_box(run.final_colors().len());
            t.elapsed().as_secs_f64()
        };
        // The two sizes of a step run back to back and each repetition gives
        // one ratio; the median of those is robust to slow drift in machine
        // load, which minimums taken separately are not.
        let mut ratios = Vec::new();
        let mut last = 0.0;
        for w in LADDER.windows(2) {
            let (small, large) = (scaling_input(w[0], w[0] as u64), scaling_input(w[1], w[1] as u64));
            let mut step: Vec<f64> = Vec::new();
            for _ in 0..reps(w[1]).min(50) {
                let ts = time(&small);
                let tl = time(&large);
                step.push(tl / ts);
                last = tl;
            }
            step.sort_by(f64::total_cmp);
            ratios.push(step[step.len() / 2]);
        }
        let shown: Vec<String> = ratios.iter().map(|x| format!("{x:.2}")).collect();
        ensure(ratios.iter().all(|&x| x <= SCALING_RATIO), || format!("ratios {shown:?} exceed {SCALING_RATIO}"))?;
        Ok(format!("t(2N)/t(N) = [{}], t(64000) = {last:.3}s", shown.join(", ")))
    });
}

#[test]
fn c11_slice_fixture() {
    run(11, "vgrep of the slice example", Duration::from_secs(1), || {
        let a = fixture("slices.struct");
        let g = vgrep(&a);
        ensure(g.node_count() == 9, || format!("{} nodes", g.node_count()))?;
        let got: BTreeSet<Vec<String>> = all_slices(&a)
            .iter()
            .map(|s| s.iter().map(|&e| a.elem_name(e).to_string()).collect())
            .collect();
        let want: BTreeSet<Vec<String>> = [&["1"][..], &["2"], &["3"], &["1", "2"], &["2", "1"], &["2", "3"], &["3", "2"]]
            .iter()
            .map(|s| s.iter().map(|x| x.to_string()).collect())
            .collect();
        ensure(got == want, || format!("slices {got:?}"))?;
        Ok("9 nodes, 7 slices".into())
    });
}

fn set_of(t: &[u32]) -> BTreeSet<u32> {
    t.iter().copied().collect()
}

/// Slice and type identities on one tuple pair and one candidate slice.
fn slice_instance(a: &[u32], b: &[u32], s: &[u32]) -> Result<(), String> {
    // Nonempty similarity type iff the tuples intersect.
    ensure(SimType::of(a, b).is_empty() == set_of(a).is_disjoint(&set_of(b)), || format!("stp/intersection {a:?} {b:?}"))?;
    // Equal self-types iff a_i -> b_i is a well-defined bijection.
    let beta_ok = a.len() == b.len() && {
        let mut f = HashMap::new();
        let mut g = HashMap::new();
        a.iter().zip(b).all(|(x, y)| *f.entry(x).or_insert(y) == y && *g.entry(y).or_insert(x) == x)
    };
    ensure((SimType::diag(a) == SimType::diag(b)) == beta_ok, || format!("self-type/bijection {a:?} {b:?}"))?;
    // Slice membership, three ways.
    let is_slice = slices(a).iter().any(|x| x == s);
    let duplicate_free = set_of(s).len() == s.len();
    let covered = (0..s.len()).all(|i| (0..a.len()).any(|j| SimType::of(s, a).contains(i, j)));
    let covered_t = (0..s.len()).all(|j| (0..a.len()).any(|i| SimType::of(a, s).contains(i, j)));
    ensure(is_slice == (duplicate_free && covered) && covered == covered_t, || format!("slice membership {a:?} {s:?}"))?;
    // Slices of a are told apart by their type with a.
    let sa = slices(a);
    let types: BTreeSet<SimType> = sa.iter().map(|x| SimType::of(a, x)).collect();
    ensure(types.len() == sa.len(), || format!("slice types collide for {a:?}"))?;
    // π_S exists iff stp(a) = stp(b), preserves types with the tuple,
    // arity and set inclusion, and inverts.
    match slice_bijection(a, b) {
        None => ensure(SimType::diag(a) != SimType::diag(b), || format!("missing π_S for {a:?} {b:?}"))?,
        Some(pi) => {
            ensure(SimType::diag(a) == SimType::diag(b), || format!("spurious π_S for {a:?} {b:?}"))?;
            let inv = slice_bijection(b, a).ok_or("no inverse")?;
            let images: BTreeSet<&Vec<u32>> = pi.values().collect();
            ensure(images.len() == pi.len() && pi.len() == slices(b).len(), || "π_S not bijective".into())?;
            for (x, tx) in &pi {
                ensure(SimType::of(a, x) == SimType::of(b, tx) && x.len() == tx.len(), || format!("π_S type {x:?}"))?;
                ensure(&inv[tx] == x, || format!("π_S round trip {x:?}"))?;
                for (y, ty) in &pi {
                    ensure(set_of(x).is_subset(&set_of(y)) == set_of(tx).is_subset(&set_of(ty)), || "π_S inclusion".into())?;
                    ensure((set_of(x) == set_of(y)) == (set_of(tx) == set_of(ty)), || "π_S set equality".into())?;
                }
            }
        }
    }
    Ok(())
}

#[test]
fn c12_slice_identities() {
    run(12, "slice identities on random instances", LIMIT_SLICES, || {
        let mut r = rng(12);
        for _ in 0..10_000 {
            let k = r.gen_range(1..=4);
            let a: Vec<u32> = (0..k).map(|_| r.gen_range(0..5)).collect();
            // Bias b towards a relabeling of a so equal self-types are common.
            let b: Vec<u32> = if r.gen_bool(0.5) {
                let shift = r.gen_range(0..5);
                a.iter().map(|x| (x + shift) % 5).collect()
            } else {
                (0..r.gen_range(1..=4)).map(|_| r.gen_range(0..5)).collect()
            };
            let s: Vec<u32> = (0..r.gen_range(1..=3)).map(|_| r.gen_range(0..5)).collect();
            slice_instance(&a, &b, &s)?;
        }
        Ok("10000 instances, 0 violations".into())
    });
}
