//! Shared fixtures for the benchmarks.

use hardy_lab::covering::{build_covering, CubeCovering, HolderProfile};
use hardy_lab::random::random_problem;
use hardy_lab::HardyProblem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded random problem with log-uniform weights in `[1e-2, 1e2]`.
pub fn problem(n: usize, p: f64, seed: u64) -> HardyProblem {
    random_problem(n, p, 1e-2, 1e2, &mut ChaCha8Rng::seed_from_u64(seed)).expect("valid problem")
}

pub fn demo_covering(depth: u32) -> CubeCovering {
    build_covering(&HolderProfile::demo(0.5), depth, 10_000_000).expect("demo covering")
}
