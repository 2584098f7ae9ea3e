use rand::Rng;
use serde::Serialize;

use super::DecompError;
use crate::covering::{CubeCovering, WeightSpec};
use crate::tree::RootedTree;

/// A piece of the domain: part of the core cell `Q_owner`, carrying the
/// values of the two weights on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fragment {
    pub owner: usize,
    pub volume: f64,
    pub nu: f64,
    pub omega: f64,
}

/// A tree covering cut into fragments on which every function of the
/// construction is constant.
///
/// The core cells `Q_t` are disjoint unions of fragments; each `B_t`
/// (`t ≠ a`) is a single fragment owned by `t` or by its parent, and
/// `U_t = Q_t ∪ B_t ∪ ⋃_{s child} B_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePartition {
    tree: RootedTree,
    fragments: Vec<Fragment>,
    slab: Vec<Option<usize>>,
    owned: Vec<Vec<usize>>,
}

impl TreePartition {
    pub fn new(
        tree: RootedTree,
        fragments: Vec<Fragment>,
        slab: Vec<Option<usize>>,
    ) -> Result<Self, DecompError> {
        let n = tree.vertex_count();
        let bad = |m: String| Err(DecompError::InvalidPartition(m));
        if slab.len() != n {
            return bad(format!("{} slab entries for {n} vertices", slab.len()));
        }
        let mut owned = vec![Vec::new(); n];
        for (c, f) in fragments.iter().enumerate() {
            if f.owner >= n {
                return bad(format!("fragment {c} has owner {} out of range", f.owner));
            }
            if !(f.volume > 0.0 && f.volume.is_finite()) {
                return bad(format!("fragment {c} has volume {}", f.volume));
            }
            if !(f.nu > 0.0 && f.omega > 0.0 && f.nu.is_finite() && f.omega.is_finite()) {
                return bad(format!("fragment {c} has non-positive weight"));
            }
            owned[f.owner].push(c);
        }
        if let Some(t) = (0..n).find(|&t| owned[t].is_empty()) {
            return bad(format!("vertex {t} owns no fragment"));
        }
        let mut used = vec![false; fragments.len()];
        for t in 0..n {
            match (tree.parent(t), slab[t]) {
                (None, None) => {}
                (None, Some(_)) => return bad("the root has no connector".into()),
                (Some(_), None) => return bad(format!("vertex {t} lacks a connector")),
                (Some(parent), Some(c)) => {
                    if c >= fragments.len() {
                        return bad(format!("connector of {t} out of range"));
                    }
                    if std::mem::replace(&mut used[c], true) {
                        return bad(format!("fragment {c} is the connector of two vertices"));
                    }
                    let o = fragments[c].owner;
                    if o != t && o != parent {
                        return bad(format!("connector of {t} lies in Q_{o}"));
                    }
                }
            }
        }
        Ok(Self {
            tree,
            fragments,
            slab,
            owned,
        })
    }

    /// Fragments of a cube covering: `Q_t` minus its children's slabs, and
    /// the slabs `B_s` themselves (inside the parent cube). Weights are
    /// `ν = ℓ_t^γ`, `ω = ℓ_t^β` on `Q_t`.
    pub fn from_covering(cov: &CubeCovering, spec: WeightSpec) -> Self {
        let tree = cov.tree().clone();
        let n = tree.vertex_count();
        let weights = |t: usize| (cov.edge(t).powf(spec.gamma), cov.edge(t).powf(spec.beta));
        let mut fragments = Vec::with_capacity(2 * n);
        for t in 0..n {
            let below: f64 = tree.children(t).iter().map(|&s| cov.slab_volume(s)).sum();
            let (nu, omega) = weights(t);
            fragments.push(Fragment {
                owner: t,
                volume: cov.volume(t) - below,
                nu,
                omega,
            });
        }
        let mut slab = vec![None; n];
        for s in tree.star_vertices() {
            let t = tree.parent(s).expect("non-root");
            let (nu, omega) = weights(t);
            slab[s] = Some(fragments.len());
            fragments.push(Fragment {
                owner: t,
                volume: cov.slab_volume(s),
                nu,
                omega,
            });
        }
        Self::new(tree, fragments, slab).expect("a covering yields a valid partition")
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    /// Fragment holding `B_t`.
    pub fn slab(&self, t: usize) -> Option<usize> {
        self.slab[t]
    }

    /// Fragments making up `Q_t`.
    pub fn core(&self, t: usize) -> &[usize] {
        &self.owned[t]
    }

    /// Fragments making up `U_t`, sorted.
    pub fn enlarged(&self, t: usize) -> Vec<usize> {
        let mut cells = self.owned[t].clone();
        cells.extend(self.slab[t]);
        cells.extend(self.tree.children(t).iter().filter_map(|&s| self.slab[s]));
        cells.sort_unstable();
        cells.dedup();
        cells
    }

    pub fn core_volume(&self, t: usize) -> f64 {
        self.owned[t].iter().map(|&c| self.fragments[c].volume).sum()
    }

    pub fn enlarged_volume(&self, t: usize) -> f64 {
        self.enlarged(t).iter().map(|&c| self.fragments[c].volume).sum()
    }

    pub fn slab_volume(&self, t: usize) -> Option<f64> {
        self.slab[t].map(|c| self.fragments[c].volume)
    }

    pub fn total_volume(&self) -> f64 {
        self.fragments.iter().map(|f| f.volume).sum()
    }
}

/// A function constant on each fragment of a partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFunction {
    pub values: Vec<f64>,
}

impl CellFunction {
    pub fn new(part: &TreePartition, values: Vec<f64>) -> Result<Self, DecompError> {
        if values.len() != part.len() {
            return Err(DecompError::Mismatch(format!(
                "{} values for {} fragments",
                values.len(),
                part.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DecompError::Mismatch("non-finite value".into()));
        }
        Ok(Self { values })
    }

    pub fn zero(part: &TreePartition) -> Self {
        Self {
            values: vec![0.0; part.len()],
        }
    }

    /// Uniform values in `[-1, 1]` minus their mean.
    pub fn random_mean_zero<R: Rng + ?Sized>(part: &TreePartition, rng: &mut R) -> Self {
        let mut values: Vec<f64> = (0..part.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mean = integral(part, &values) / part.total_volume();
        values.iter_mut().for_each(|v| *v -= mean);
        Self { values }
    }

    pub fn integral(&self, part: &TreePartition) -> f64 {
        integral(part, &self.values)
    }

    pub fn l1(&self, part: &TreePartition) -> f64 {
        self.values
            .iter()
            .zip(part.fragments())
            .map(|(v, f)| v.abs() * f.volume)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `|∫g| <= tol ‖g‖₁`.
    pub fn is_mean_zero(&self, part: &TreePartition, tol: f64) -> bool {
        self.integral(part).abs() <= tol * self.l1(part)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| lambda * v).collect(),
        }
    }
}

fn integral(part: &TreePartition, values: &[f64]) -> f64 {
    values
        .iter()
        .zip(part.fragments())
        .map(|(v, f)| v * f.volume)
        .sum()
}
