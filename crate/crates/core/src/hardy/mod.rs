//! Weighted discrete Hardy inequality on a rooted tree.
//!
//! For positive weights `u`, `v` on Γ* the inequality
//!
//! ```text
//! ( Σ_s | v_s Σ_{a≺t⪯s} d_t |^p )^{1/p}  <=  C ( Σ_s |d_s u_s|^p )^{1/p}
//! ```
//!
//! has a best constant `C`, equal to the ℓ^p operator norm of the
//! nonnegative lower-triangular matrix `M[s,t] = v_s u_t^{-1} [t ⪯ s]`.
//! This module computes `C` directly, together with the classical chain
//! quantity `A_chain`, the θ-family `A_tree(θ)` that bounds `C` from above,
//! and the subtree supremum `B` that sandwiches `C` within a factor of four.

mod conditions;
mod ehp;
mod norm;
mod report;
mod theta;

pub use conditions::{
    a_chain, a_tree, chain_equivalence_check, level_profile, ChainCheck, LevelProfile, SupValue,
};
pub use ehp::{alpha_k, ehp_b, AlphaK, AlphaMethod, EhpB};
pub use norm::{exact_constant, ExactConstant, Form, NormOptions};
pub use report::{analyze, AnalyzeOptions, HardyReport, InvariantCheck};
pub use theta::{optimize_theta, theta_grid, ThetaOptimum, DEFAULT_THETA_MAX, THETA_GRID_POINTS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{RootedTree, TreeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardyError {
    #[error("exponent p = {0} is not in (1, ∞)")]
    InvalidExponent(f64),
    #[error("weight {name}[{index}] = {value} is not positive and finite")]
    NonPositiveWeight {
        name: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{name} has {got} entries, expected {expected} (one per non-root vertex)")]
    LengthMismatch {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("the tree has no non-root vertices")]
    EmptyTree,
    #[error("θ = {0} must be greater than 1")]
    ThetaOutOfRange(f64),
    #[error("the tree is not a chain")]
    NotAChain,
    #[error("{n} non-root vertices exceed the dense cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("power iteration did not converge after {iterations} iterations (best ratio {best})")]
    NonConvergence { best: f64, iterations: usize },
    #[error("A_tree(θ) is infinite for every sampled θ")]
    Unbounded,
    #[error("α_K solver stalled with KKT residual {0:e}")]
    AlphaSolver(f64),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// A tree with weights `u`, `v` on Γ* and an exponent `p`. Weight vectors
/// are indexed by [`RootedTree::star_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct HardyProblem {
    tree: RootedTree,
    u: Vec<f64>,
    v: Vec<f64>,
    p: f64,
}

impl HardyProblem {
    pub fn new(tree: RootedTree, u: Vec<f64>, v: Vec<f64>, p: f64) -> Result<Self, HardyError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(HardyError::InvalidExponent(p));
        }
        let n = tree.star_count();
        if n == 0 {
            return Err(HardyError::EmptyTree);
        }
        for (name, w) in [("u", &u), ("v", &v)] {
            if w.len() != n {
                return Err(HardyError::LengthMismatch {
                    name,
                    got: w.len(),
                    expected: n,
                });
            }
            if let Some((index, &value)) = w
                .iter()
                .enumerate()
                .find(|(_, x)| !(**x > 0.0 && x.is_finite()))
            {
                return Err(HardyError::NonPositiveWeight { name, index, value });
            }
        }
        Ok(Self { tree, u, v, p })
    }

    /// Unit weights `u = v = 1`.
    pub fn unit(tree: RootedTree, p: f64) -> Result<Self, HardyError> {
        let n = tree.star_count();
        Self::new(tree, vec![1.0; n], vec![1.0; n], p)
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent, always derived from `p`.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Weight `u` at a (non-root) vertex id.
    pub fn u_at(&self, vertex: usize) -> f64 {
        self.u[self.tree.star_index(vertex)]
    }

    pub fn v_at(&self, vertex: usize) -> f64 {
        self.v[self.tree.star_index(vertex)]
    }

    /// Same weights with `u ← λu`, `v ← μv`.
    pub fn rescaled(&self, lambda: f64, mu: f64) -> Result<Self, HardyError> {
        Self::new(
            self.tree.clone(),
            self.u.iter().map(|x| x * lambda).collect(),
            self.v.iter().map(|x| x * mu).collect(),
            self.p,
        )
    }

    /// Restriction to vertices of depth `<= depth`.
    pub fn truncate(&self, depth: usize) -> Result<Self, HardyError> {
        let (tree, old) = self.tree.truncate(depth);
        let mut u = vec![0.0; tree.star_count()];
        let mut v = vec![0.0; tree.star_count()];
        for new in tree.star_vertices() {
            let i = tree.star_index(new);
            u[i] = self.u_at(old[new]);
            v[i] = self.v_at(old[new]);
        }
        Self::new(tree, u, v, self.p)
    }

    /// `N(t) = Σ_{a≺s⪯t} u_s^{-q}` for every vertex (0 at the root).
    pub(crate) fn path_sums(&self) -> Vec<f64> {
        let q = self.q();
        let mut n = vec![0.0; self.tree.vertex_count()];
        for &t in self.tree.preorder().iter().skip(1) {
            let parent = self.tree.parent(t).expect("non-root");
            n[t] = n[parent] + self.u_at(t).powf(-q);
        }
        n
    }

    /// `Σ_{s⪰t} term(s)` for every vertex; the root slot sums all of Γ*.
    pub(crate) fn shadow_sums(&self, term: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut acc = vec![0.0; self.tree.vertex_count()];
        for &t in self.tree.preorder().iter().rev() {
            if t != self.tree.root() {
                acc[t] += term(t);
                let parent = self.tree.parent(t).expect("non-root");
                acc[parent] += acc[t];
            }
        }
        acc
    }
}

/// Builds `u_t = |B_t|^{1/p} ν_t`, `v_t = |B_t|^{1/p} ω_t` from connector
/// volumes and the two weight sequences (all indexed over Γ*).
pub fn assemble_uv(
    tree: RootedTree,
    volumes: &[f64],
    nu: &[f64],
    omega: &[f64],
    p: f64,
) -> Result<HardyProblem, HardyError> {
    let n = tree.star_count();
    for (name, w) in [("volumes", volumes), ("nu", nu), ("omega", omega)] {
        if w.len() != n {
            return Err(HardyError::LengthMismatch {
                name,
                got: w.len(),
                expected: n,
            });
        }
        if let Some((index, &value)) = w
            .iter()
            .enumerate()
            .find(|(_, x)| !(**x > 0.0 && x.is_finite()))
        {
            return Err(HardyError::NonPositiveWeight { name, index, value });
        }
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(HardyError::InvalidExponent(p));
    }
    let scale: Vec<f64> = volumes.iter().map(|b| b.powf(1.0 / p)).collect();
    let u = scale.iter().zip(nu).map(|(s, x)| s * x).collect();
    let v = scale.iter().zip(omega).map(|(s, x)| s * x).collect();
    HardyProblem::new(tree, u, v, p)
}

/// JSON tree format `{"root": int, "parents": [[child, parent], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeJson {
    pub root: usize,
    pub parents: Vec<[usize; 2]>,
}

impl TreeJson {
    pub fn from_tree(tree: &RootedTree) -> Self {
        Self {
            root: tree.root(),
            parents: tree.edges().into_iter().map(|(c, p)| [c, p]).collect(),
        }
    }

    pub fn to_tree(&self) -> Result<RootedTree, TreeError> {
        let pairs: Vec<(usize, usize)> = self.parents.iter().map(|e| (e[0], e[1])).collect();
        RootedTree::with_root(self.root, &pairs)
    }
}

/// Problem JSON `{"tree": <tree>, "u": [..], "v": [..], "p": float}`; the
/// weight arrays list Γ* in increasing vertex id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemJson {
    pub tree: TreeJson,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: f64,
}

impl ProblemJson {
    pub fn from_problem(problem: &HardyProblem) -> Self {
        Self {
            tree: TreeJson::from_tree(problem.tree()),
            u: problem.u().to_vec(),
            v: problem.v().to_vec(),
            p: problem.p(),
        }
    }

    pub fn to_problem(&self) -> Result<HardyProblem, HardyError> {
        HardyProblem::new(self.tree.to_tree()?, self.u.clone(), self.v.clone(), self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assemble_examples() {
        let t = RootedTree::chain(1);
        let p = assemble_uv(t.clone(), &[1.0], &[2.0], &[3.0], 2.0).unwrap();
        assert_eq!((p.u()[0], p.v()[0]), (2.0, 3.0));
        let p = assemble_uv(t.clone(), &[16.0], &[1.0], &[1.0], 2.0).unwrap();
        assert_eq!((p.u()[0], p.v()[0]), (4.0, 4.0));
        let p = assemble_uv(t.clone(), &[8.0], &[0.5], &[2.0], 3.0).unwrap();
        assert!((p.u()[0] - 1.0).abs() < 1e-15);
        assert!((p.v()[0] - 4.0).abs() < 1e-14);
        assert!(matches!(
            assemble_uv(t, &[0.0], &[1.0], &[1.0], 2.0),
            Err(HardyError::NonPositiveWeight { name: "volumes", .. })
        ));
    }

    #[test]
    fn validation() {
        let t = RootedTree::chain(2);
        assert!(matches!(
            HardyProblem::new(t.clone(), vec![1.0; 2], vec![1.0; 2], 1.0),
            Err(HardyError::InvalidExponent(_))
        ));
        assert!(matches!(
            HardyProblem::new(t.clone(), vec![1.0], vec![1.0; 2], 2.0),
            Err(HardyError::LengthMismatch { name: "u", .. })
        ));
        assert!(matches!(
            HardyProblem::new(t.clone(), vec![1.0, f64::INFINITY], vec![1.0; 2], 2.0),
            Err(HardyError::NonPositiveWeight { name: "u", index: 1, .. })
        ));
        assert!(matches!(
            HardyProblem::unit(RootedTree::chain(0), 2.0),
            Err(HardyError::EmptyTree)
        ));
        let p = HardyProblem::unit(t, 3.0).unwrap();
        assert!((p.q() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let tree = RootedTree::with_root(0, &[(1, 0), (2, 0), (3, 1)]).unwrap();
        let p = HardyProblem::new(tree, vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], 2.5).unwrap();
        let text = serde_json::to_string(&ProblemJson::from_problem(&p)).unwrap();
        let back: ProblemJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_problem().unwrap(), p);
    }
}
