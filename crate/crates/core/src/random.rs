//! Seeded random trees and weights.

use rand::Rng;

use crate::hardy::{HardyError, HardyProblem};
use crate::tree::RootedTree;

/// Random recursive tree on `n` vertices: vertex `k` attaches to a uniformly
/// chosen vertex among `0..k`. Vertex 0 is the root.
pub fn random_recursive_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RootedTree {
    assert!(n >= 1, "a tree needs at least the root");
    let mut parent = vec![None; n];
    for (k, slot) in parent.iter_mut().enumerate().skip(1) {
        *slot = Some(rng.gen_range(0..k));
    }
    RootedTree::from_parents(parent).expect("attachment process yields a tree")
}

/// `10^x` with `x` uniform in `[log10 lo, log10 hi]`.
pub fn log_uniform<R: Rng + ?Sized>(lo: f64, hi: f64, count: usize, rng: &mut R) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count).map(|_| 10f64.powf(rng.gen_range(a..=b))).collect()
}

/// Random problem on `n` vertices with log-uniform weights in `[lo, hi]`.
pub fn random_problem<R: Rng + ?Sized>(
    n: usize,
    p: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<HardyProblem, HardyError> {
    let tree = random_recursive_tree(n, rng);
    let m = tree.star_count();
    let u = log_uniform(lo, hi, m, rng);
    let v = log_uniform(lo, hi, m, rng);
    HardyProblem::new(tree, u, v, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_and_in_range() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(random_recursive_tree(30, &mut a), random_recursive_tree(30, &mut b));
        let w = log_uniform(1e-2, 1e2, 1000, &mut a);
        assert!(w.iter().all(|&x| (1e-2..=1e2).contains(&x)));
        assert!(w.iter().any(|&x| x < 0.1) && w.iter().any(|&x| x > 10.0));
    }

    #[test]
    fn single_vertex_tree() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_recursive_tree(1, &mut r).vertex_count(), 1);
    }
}
