//! Seeded random structures for tests, benchmarks and the CLI.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::structure::{Elem, Signature, Structure, StructureBuilder};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A signature with `rels` symbols named `R0, R1, ..` of arity in
/// `1..=max_arity`.
pub fn random_signature<R: Rng>(rels: usize, max_arity: usize, rng: &mut R) -> Signature {
    let symbols: Vec<(String, usize)> = (0..rels).map(|i| (format!("R{i}"), rng.gen_range(1..=max_arity))).collect();
    Signature::new(symbols).expect("generated names are distinct")
}

/// `facts` random facts over elements `0..universe`. Only elements that end
/// up covered are kept, so the result is always a valid structure. With
/// `repeat` the chance of reusing an element within one fact, tuples with
/// repeated entries are produced too.
pub fn random_structure<R: Rng>(sig: &Signature, universe: usize, facts: usize, repeat: f64, rng: &mut R) -> Structure {
    let rels: Vec<_> = sig.rel_ids().collect();
    let mut b = StructureBuilder::new(sig.clone());
    for _ in 0..facts.max(1) {
        let rel = *rels.choose(rng).expect("non-empty signature");
        let mut t: Vec<usize> = Vec::with_capacity(sig.arity(rel));
        for j in 0..sig.arity(rel) {
            let x = if j > 0 && rng.gen_bool(repeat) { t[rng.gen_range(0..j)] } else { rng.gen_range(0..universe.max(1)) };
            t.push(x);
        }
        let t: Vec<Elem> = t.iter().map(|x| b.elem(&x.to_string())).collect();
        b.fact_ids(rel, t).expect("arity matches");
    }
    b.build(false).expect("every element is covered")
}

/// A graph signature `E/2` structure: a disjoint union of cycles whose
/// lengths sum to `n`, the standard CR-hard input (`C_6` vs `2 C_3`).
pub fn cycles(lengths: &[usize]) -> Structure {
    let sig = Signature::new([("E", 2)]).expect("valid signature");
    let mut b = StructureBuilder::new(sig);
    let mut base = 0;
    for &len in lengths {
        for i in 0..len {
            let (x, y) = ((base + i).to_string(), (base + (i + 1) % len).to_string());
            b.fact("E", &[&x, &y]).expect("valid fact");
            b.fact("E", &[&y, &x]).expect("valid fact");
        }
        base += len;
    }
    b.build(false).expect("cycles cover their vertices")
}
