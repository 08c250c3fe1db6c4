mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::Rng as _;
use relcr::acyclic::{extract_print, random_acyclic, structure_from_print, validate_join_tree};
use relcr::cr::{cr_run, CrOptions};
use relcr::game::GameSolver;
use relcr::gen::rng;
use relcr::homcount::{hom_acyclic, hom_bruteforce, hom_multigraph};
use relcr::logic::{check_wf, count_exactly, count_geq, evaluate, parse_formula, to_sexp, Atom, Synthesizer, Var};
use relcr::parse::{parse_structure, parse_structure_json, serialize_structure, serialize_structure_json};
use relcr::rcr::{rcr_run, JointRun};
use relcr::representations::{grep, jtrep, Representation};
use relcr::slices::{slice_bijection, slices};
use relcr::types::SimType;

use common::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn cr_engine_matches_naive_refinement(seed in any::<u64>(), rep in 0usize..5) {
        let mut r = rng(seed);
        let a = small_structure(&mut r, 3, 3, 12);
        let rep = [Representation::Grep, Representation::Vgrep, Representation::Incidence,
                   Representation::EnrichedGaifman, Representation::EnrichedIncidence][rep];
        let g = rep.build(&a);
        let oracle = naive_cr(&g);
        let run = cr_run(&g, CrOptions { max_rounds: None, trace: true });
        let rounds = oracle.len().max(run.computed_rounds());
        for i in 0..rounds {
            let want = &oracle[i.min(oracle.len() - 1)];
            prop_assert!(same_partition(run.colors(i), want), "round {} of {:?}", i, rep);
        }
        prop_assert_eq!(run.stable_round, Some(oracle.len() - 1));
    }

    #[test]
    fn rcr_refines_and_stabilizes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = small_structure(&mut r, 3, 3, 15);
        let run = rcr_run(&a, None);
        prop_assert!(run.stable_round.is_some());
        for i in 1..run.rounds() {
            prop_assert!(run.class_count(i) >= run.class_count(i - 1));
            // Same color in round i implies same color in round i - 1.
            let mut back = HashMap::new();
            for t in a.tup_ids() {
                let prev = *back.entry(run.color(i, t)).or_insert(run.color(i - 1, t));
                prop_assert_eq!(prev, run.color(i - 1, t));
            }
        }
    }

    #[test]
    fn rcr_is_invariant_under_renaming(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = small_structure(&mut r, 3, 3, 10);
        // Reversing the element order gives an isomorphic copy.
        let text = serialize_structure(&a);
        let renamed: String = text
            .lines()
            .map(|l| match l.strip_prefix("universe:") {
                Some(rest) => {
                    let mut names: Vec<&str> = rest.split(',').map(str::trim).collect();
                    names.reverse();
                    format!("universe: {}", names.join(", "))
                }
                None => l.to_string(),
            })
            .collect::<Vec<_>>()
            .join("\n");
        let b = parse_structure(&renamed, false).unwrap();
        prop_assert!(JointRun::new(&a, &b).unwrap().first_difference().is_none());
    }

    #[test]
    fn text_and_json_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = small_structure(&mut r, 3, 4, 10);
        let b = parse_structure(&serialize_structure(&a), false).unwrap();
        prop_assert_eq!(serialize_structure(&a), serialize_structure(&b));
        let c = parse_structure_json(&serialize_structure_json(&a), false).unwrap();
        prop_assert_eq!(serialize_structure(&a), serialize_structure(&c));
    }

    #[test]
    fn acyclic_dp_matches_bruteforce(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = small_structure(&mut r, 2, 3, 7);
        let nodes = r.gen_range(1..=4);
        let (c, j) = random_acyclic(a.signature(), nodes, &mut r);
        prop_assert!(validate_join_tree(&c, &j).is_ok());
        let brute = hom_bruteforce(&c, &a).unwrap();
        prop_assert_eq!(&hom_acyclic(&c, &j, &a).unwrap(), &brute);
        prop_assert_eq!(&hom_multigraph(&jtrep(&c, &j), &grep(&a)).unwrap(), &brute);
    }

    #[test]
    fn print_round_trip_preserves_hom_counts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = small_structure(&mut r, 2, 3, 6);
        let (c, j) = random_acyclic(a.signature(), r.gen_range(1..=4), &mut r);
        let (c2, j2) = structure_from_print(c.signature(), &extract_print(&c, &j), 0).unwrap();
        prop_assert_eq!(hom_acyclic(&c, &j, &a).unwrap(), hom_acyclic(&c2, &j2, &a).unwrap());
    }

    #[test]
    fn exactly_is_geq_and_not_geq_plus_one(seed in any::<u64>(), n in 0u64..4) {
        let mut r = rng(seed);
        let a = small_structure(&mut r, 1, 2, 8);
        let rel = a.signature().symbols()[0].clone();
        let vars: Vec<Var> = (0..rel.arity).map(|i| Var::new(&format!("v{i}"))).collect();
        let guard = Atom { rel: rel.name.clone(), args: vars.clone() };
        let body = relcr::logic::atom(&rel.name, &vars);
        let quantified = vars[1..].to_vec();
        let exact = count_exactly(n, quantified.clone(), guard.clone(), body.clone());
        for e in 0..a.universe_size() as u32 {
            let env: Assignment = [(vars[0].clone(), e)].into_iter().collect();
            let ge = |k: u64| k == 0 || evaluate(&a, &count_geq(k, quantified.clone(), guard.clone(), body.clone()), &env).unwrap();
            prop_assert_eq!(evaluate(&a, &exact, &env).unwrap(), ge(n) && !ge(n + 1));
        }
    }

    #[test]
    fn synthesized_formulas_are_well_formed_and_print(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = small_structure(&mut r, 2, 3, 6);
        let run = rcr_run(&a, None);
        let mut s = Synthesizer::new(&run, a.signature());
        for i in 0..run.rounds() {
            for c in run.colors_at(i) {
                let f = s.color_formula(c).unwrap();
                let wf = check_wf(&f).unwrap();
                prop_assert_eq!(wf.free.len(), s.free_vars(run.interner.info(c).arity).iter().collect::<std::collections::BTreeSet<_>>().len());
                prop_assert_eq!(wf.gd, i);
                if let Some(text) = to_sexp(&f, 50_000) {
                    prop_assert_eq!(&parse_formula(&text).unwrap(), &f);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(cases(48))]

    /// A formula that tells two configurations apart gives Spoiler a win
    /// within its guard depth.
    #[test]
    fn formula_disagreement_gives_spoiler_win(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = small_structure(&mut r, 2, 2, 5);
        let b = strict_size_twin(&a, &mut r);
        let joint = JointRun::new(&a, &b).unwrap();
        let sig = joint.union.structure.signature();
        let mut s = Synthesizer::new(&joint.run, sig);
        let mut solver = GameSolver::new(&a, &b);
        let last = joint.run.rounds() - 1;
        for c in joint.run.colors_at(last) {
            let f = s.color_formula(c).unwrap();
            let gd = check_wf(&f).unwrap().gd;
            let vars = s.free_vars(joint.run.interner.info(c).arity);
            let assign = |t: &[u32]| -> Assignment { vars.iter().cloned().zip(t.iter().copied()).collect() };
            for ta in a.tuples().iter().filter(|t| t.elems.len() == vars.len()) {
                for tb in b.tuples().iter().filter(|t| t.elems.len() == vars.len()) {
                    let ea = evaluate(&a, &f, &assign(&ta.elems)).unwrap();
                    let eb = evaluate(&b, &f, &assign(&tb.elems)).unwrap();
                    if ea != eb {
                        prop_assert!(!solver.duplicator_wins(&ta.elems, &tb.elems, gd));
                    }
                }
            }
        }
    }
}

#[test]
fn slice_identities_hold_on_random_tuples() {
    let mut r = rng(11);
    for _ in 0..2_000 {
        let k = r.gen_range(1..=4);
        let a: Vec<u32> = (0..k).map(|_| r.gen_range(0..5)).collect();
        let b: Vec<u32> = (0..k).map(|_| r.gen_range(0..5)).collect();
        let same_stp = SimType::diag(&a) == SimType::diag(&b);
        assert_eq!(slice_bijection(&a, &b).is_some(), same_stp, "{a:?} {b:?}");
        let sa = slices(&a);
        let by_stp: HashMap<SimType, &Vec<u32>> = sa.iter().map(|s| (SimType::of(&a, s), s)).collect();
        assert_eq!(by_stp.len(), sa.len());
    }
}
