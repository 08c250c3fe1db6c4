//! Workloads shared by the benchmarks.

use relcr::gen::{random_signature, random_structure, rng};
use relcr::Structure;

/// A sparse random structure with about `tuples` facts over a fixed
/// signature of mixed arity, so inputs of different sizes are comparable.
pub fn sparse(tuples: usize, seed: u64) -> Structure {
    let mut r = rng(seed);
    let sig = random_signature(3, 3, &mut rng(7));
    random_structure(&sig, tuples, tuples, 0.1, &mut r)
}

/// Sizes used by the scaling benchmark, doubling each step.
pub const LADDER: [usize; 5] = [1_000, 2_000, 4_000, 8_000, 16_000];
