use rayon::prelude::*;
use serde::Serialize;

use super::{HardyError, HardyProblem};

/// A supremum over Γ* together with the vertex attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupValue {
    pub value: f64,
    pub argmax: usize,
}

/// Reduces `(vertex, value)` pairs to the largest value, smallest id on ties.
fn sup_over_star(problem: &HardyProblem, value: impl Fn(usize) -> f64 + Sync) -> SupValue {
    let tree = problem.tree();
    let root = tree.root();
    (0..tree.vertex_count())
        .into_par_iter()
        .filter(|&t| t != root)
        .map(|t| SupValue {
            value: value(t),
            argmax: t,
        })
        .reduce_with(|a, b| {
            if b.value > a.value || (b.value == a.value && b.argmax < a.argmax) {
                b
            } else {
                a
            }
        })
        .expect("Γ* is nonempty")
}

/// `sup_t (Σ_{a≺s⪯t} u_s^{-q})^{1/q} (Σ_{s⪰t} v_s^p)^{1/p}`.
pub fn a_chain(problem: &HardyProblem) -> SupValue {
    let (p, q) = (problem.p(), problem.q());
    let n = problem.path_sums();
    let s = problem.shadow_sums(|t| problem.v_at(t).powf(p));
    sup_over_star(problem, |t| n[t].powf(1.0 / q) * s[t].powf(1.0 / p))
}

/// `sup_t N(t)^{1/(θq)} (Σ_{s⪰t} v_s^p N(s)^{(p/q)(1-1/θ)})^{1/p}`.
pub fn a_tree(problem: &HardyProblem, theta: f64) -> Result<SupValue, HardyError> {
    if !(theta > 1.0) {
        return Err(HardyError::ThetaOutOfRange(theta));
    }
    let (p, q) = (problem.p(), problem.q());
    let n = problem.path_sums();
    let expo = (p / q) * (1.0 - 1.0 / theta);
    let s = problem.shadow_sums(|t| problem.v_at(t).powf(p) * n[t].powf(expo));
    Ok(sup_over_star(problem, |t| {
        n[t].powf(1.0 / (theta * q)) * s[t].powf(1.0 / p)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    pub theta: f64,
    pub cond2_ok: bool,
    pub atree_bound_ok: bool,
    /// Largest `LHS / (θ M(t)^{1/θ})` over the chain.
    pub worst_cond2_ratio: f64,
    pub a_tree: f64,
    pub a_chain: f64,
}

/// Checks the two chain inequalities at a given θ.
pub fn chain_equivalence_check(
    problem: &HardyProblem,
    theta: f64,
) -> Result<ChainCheck, HardyError> {
    if !problem.tree().is_chain() {
        return Err(HardyError::NotAChain);
    }
    let p = problem.p();
    let m = problem.shadow_sums(|t| problem.v_at(t).powf(p));
    let lhs = problem.shadow_sums(|t| problem.v_at(t).powf(p) * m[t].powf(1.0 / theta - 1.0));
    let worst = problem
        .tree()
        .star_vertices()
        .map(|t| lhs[t] / (theta * m[t].powf(1.0 / theta)))
        .fold(0.0, f64::max);
    let at = a_tree(problem, theta)?.value;
    let ac = a_chain(problem).value;
    Ok(ChainCheck {
        theta,
        cond2_ok: worst <= 1.0 + 1e-9,
        atree_bound_ok: at <= theta.powf(1.0 / p) * ac * (1.0 + 1e-9),
        worst_cond2_ratio: worst,
        a_tree: at,
        a_chain: ac,
    })
}

/// A quantity evaluated on the truncations of a tree to depths `1..=height`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelProfile {
    pub values: Vec<f64>,
    pub diverging: bool,
}

impl LevelProfile {
    pub const GROWTH: f64 = 1.05;
    pub const WINDOW: usize = 5;

    pub fn from_values(values: Vec<f64>) -> Self {
        let diverging = Self::grows(&values, Self::GROWTH, Self::WINDOW);
        Self { values, diverging }
    }

    /// True when each of the last `window` consecutive ratios is `>= factor`.
    pub fn grows(values: &[f64], factor: f64, window: usize) -> bool {
        values.len() > window
            && values[values.len() - window - 1..]
                .windows(2)
                .all(|w| w[1] >= factor * w[0])
    }

    /// Largest relative change between consecutive values among the last
    /// `window` steps.
    pub fn last_relative_change(&self, window: usize) -> Option<f64> {
        if self.values.len() <= window {
            return None;
        }
        let tail = &self.values[self.values.len() - window - 1..];
        Some(
            tail.windows(2)
                .map(|w| (w[1] - w[0]).abs() / w[0].abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max),
        )
    }
}

/// Evaluates `quantity` on each depth truncation of `problem`.
pub fn level_profile<F>(problem: &HardyProblem, quantity: F) -> Result<LevelProfile, HardyError>
where
    F: Fn(&HardyProblem) -> Result<f64, HardyError> + Sync,
{
    let height = problem.tree().height();
    let values = (1..=height)
        .into_par_iter()
        .map(|d| quantity(&problem.truncate(d)?))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LevelProfile::from_values(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::RootedTree;

    fn two_chain() -> HardyProblem {
        HardyProblem::unit(RootedTree::chain(2), 2.0).unwrap()
    }

    fn single(u: f64, v: f64, p: f64) -> HardyProblem {
        HardyProblem::new(RootedTree::chain(1), vec![u], vec![v], p).unwrap()
    }

    #[test]
    fn chain_values() {
        assert_eq!(a_chain(&single(2.0, 3.0, 2.0)).value, 1.5);
        let r = a_chain(&two_chain());
        assert!((r.value - 2f64.sqrt()).abs() < 1e-15);
        // t=1 gives 1·√2, t=2 gives √2·1; the lower id wins.
        assert_eq!(r.argmax, 1);
        let star = HardyProblem::unit(RootedTree::star(2), 2.0).unwrap();
        assert_eq!(a_chain(&star).value, 1.0);
    }

    #[test]
    fn tree_values() {
        assert!((a_tree(&single(2.0, 3.0, 2.0), 2.0).unwrap().value - 1.5).abs() < 1e-15);
        let v = a_tree(&two_chain(), 2.0).unwrap().value;
        assert!((v - (1.0 + 2f64.sqrt()).sqrt()).abs() < 1e-12);
        assert!((v - 1.553774).abs() < 1e-6);
        assert!(matches!(
            a_tree(&two_chain(), 1.0),
            Err(HardyError::ThetaOutOfRange(_))
        ));
    }

    #[test]
    fn large_theta_approaches_chain() {
        let tree = RootedTree::with_root(0, &[(1, 0), (2, 1), (3, 1), (4, 0), (5, 3)]).unwrap();
        let pr =
            HardyProblem::new(tree, vec![0.5, 2.0, 1.0, 3.0, 0.7], vec![1.0, 0.3, 2.0, 1.5, 0.9], 3.0)
                .unwrap();
        let at = a_tree(&pr, 1e6).unwrap().value;
        assert!(at >= a_chain(&pr).value - 1e-9);
    }

    #[test]
    fn chain_check_examples() {
        let one = single(1.7, 0.4, 2.0);
        let c = chain_equivalence_check(&one, 2.0).unwrap();
        assert!(c.cond2_ok && c.atree_bound_ok);
        let c = chain_equivalence_check(&two_chain(), 2.0).unwrap();
        // t=1: 2^{-1/2} + 1 against 2·2^{1/2}.
        let expected = (0.5f64.sqrt() + 1.0) / (2.0 * 2f64.sqrt());
        assert!((c.worst_cond2_ratio - expected).abs() < 1e-12);
        assert!(c.cond2_ok && c.atree_bound_ok);
        assert!((c.a_tree - 1.553774).abs() < 1e-6);
        let star = HardyProblem::unit(RootedTree::star(2), 2.0).unwrap();
        assert!(matches!(
            chain_equivalence_check(&star, 2.0),
            Err(HardyError::NotAChain)
        ));
    }

    #[test]
    fn growth_flag() {
        let up: Vec<f64> = (0..8).map(|k| 1.1f64.powi(k)).collect();
        assert!(LevelProfile::from_values(up).diverging);
        let flat = vec![1.0, 1.2, 1.3, 1.31, 1.311, 1.311, 1.311];
        assert!(!LevelProfile::from_values(flat.clone()).diverging);
        assert!(!LevelProfile::from_values(vec![1.0, 2.0, 4.0]).diverging);
        let lp = LevelProfile::from_values(flat);
        assert!(lp.last_relative_change(2).unwrap() < 1e-12);
    }

    #[test]
    fn profile_of_chain() {
        let pr = HardyProblem::unit(RootedTree::chain(4), 2.0).unwrap();
        let lp = level_profile(&pr, |p| Ok(a_chain(p).value)).unwrap();
        // sup_t (t (k - t + 1))^{1/2} on a unit chain of length k
        let expect = [1.0, 2f64.sqrt(), 2.0, 6f64.sqrt()];
        for (a, b) in lp.values.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
