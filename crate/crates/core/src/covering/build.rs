use rayon::prelude::*;
use serde::Serialize;

use super::profile::{Decision, HolderProfile};
use super::CoveringError;
use crate::tree::RootedTree;

/// Axis-aligned cube with integer coordinates in units of `ℓ 2^{-unit_exp}`.
/// Unused base coordinates (for `n = 2`) are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cube {
    pub base: [i64; 2],
    pub bottom: i64,
    pub edge: i64,
    /// `ℓ_t = ℓ 2^{-size_index}`.
    pub size_index: u32,
    pub level: u32,
}

impl Cube {
    pub fn top(&self) -> i64 {
        self.bottom + self.edge
    }
}

/// The cube tree covering of `Ω_φ` truncated at `depth_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeCovering {
    pub profile: HolderProfile,
    pub depth_max: u32,
    pub unit_exp: u32,
    #[serde(skip)]
    tree: RootedTree,
    cubes: Vec<Cube>,
    /// Containment tests that could not be settled and were treated as
    /// failures (half-size children).
    pub inconclusive_tests: usize,
}

impl CubeCovering {
    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn cube(&self, t: usize) -> &Cube {
        &self.cubes[t]
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Length of one coordinate unit.
    pub fn unit(&self) -> f64 {
        self.profile.ell * 2f64.powi(-(self.unit_exp as i32))
    }

    pub fn edge(&self, t: usize) -> f64 {
        self.cubes[t].edge as f64 * self.unit()
    }

    pub fn volume(&self, t: usize) -> f64 {
        self.edge(t).powi(self.profile.n as i32)
    }

    /// `|B_t| = |Q_t| / 2` for `t ≠ a`.
    pub fn slab_volume(&self, t: usize) -> f64 {
        0.5 * self.volume(t)
    }

    /// `|U_t|`: `(3/2)|Q_t|`, and `|Q_a|` at the root (see `slab` docs).
    pub fn enlarged_volume(&self, t: usize) -> f64 {
        if t == self.tree.root() {
            self.volume(t)
        } else {
            1.5 * self.volume(t)
        }
    }

    /// Number of cubes per level.
    pub fn level_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.depth_max as usize + 1];
        for q in &self.cubes {
            c[q.level as usize] += 1;
        }
        while c.len() > 1 && *c.last().unwrap() == 0 {
            c.pop();
        }
        c
    }

    /// Center of `Q_t` in absolute coordinates.
    pub fn center(&self, t: usize) -> Vec<f64> {
        let q = &self.cubes[t];
        let u = self.unit();
        let half = q.edge as f64 / 2.0;
        let mut c: Vec<f64> = (0..self.profile.base_dim())
            .map(|i| (q.base[i] as f64 + half) * u)
            .collect();
        c.push((q.bottom as f64 + half) * u);
        c
    }

    /// Sub-covering formed by the cubes of level `<= depth`.
    pub fn truncate(&self, depth: u32) -> CubeCovering {
        let (tree, old) = self.tree.truncate(depth as usize);
        CubeCovering {
            profile: self.profile,
            depth_max: depth.min(self.depth_max),
            unit_exp: self.unit_exp,
            cubes: old.iter().map(|&o| self.cubes[o]).collect(),
            tree,
            inconclusive_tests: self.inconclusive_tests,
        }
    }
}

/// Builds the covering level by level from the root cube
/// `(-ℓ/2, ℓ/2)^{n-1} × (0, ℓ)`.
pub fn build_covering(
    profile: &HolderProfile,
    depth_max: u32,
    cube_cap: usize,
) -> Result<CubeCovering, CoveringError> {
    if depth_max > 40 {
        return Err(CoveringError::DepthTooLarge(depth_max));
    }
    let d = profile.base_dim();
    let unit_exp = depth_max + 1;
    let full = 1i64 << unit_exp;
    let unit = profile.ell / full as f64;
    let domain = 3 * full / 2;

    let root = Cube {
        base: [-full / 2, if d == 2 { -full / 2 } else { 0 }],
        bottom: 0,
        edge: full,
        size_index: 0,
        level: 0,
    };
    let mut cubes = vec![root];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut frontier = vec![0usize];
    let mut inconclusive = 0;

    for level in 0..depth_max {
        let results: Vec<(Vec<Cube>, bool)> = frontier
            .par_iter()
            .map(|&t| children_of(profile, &cubes[t], unit, domain, level + 1))
            .collect();
        let mut next = Vec::new();
        for (&t, (kids, unsettled)) in frontier.iter().zip(results) {
            inconclusive += usize::from(unsettled);
            for k in kids {
                if cubes.len() == cube_cap {
                    return Err(CoveringError::CubeCap(cube_cap));
                }
                next.push(cubes.len());
                cubes.push(k);
                parent.push(Some(t));
            }
        }
        frontier = next;
    }
    let tree = RootedTree::from_parents(parent).expect("construction yields a tree");
    Ok(CubeCovering {
        profile: *profile,
        depth_max,
        unit_exp,
        tree,
        cubes,
        inconclusive_tests: inconclusive,
    })
}

/// Children of `q`: one translate when `3(Q + ℓ_t e_n) ⊂ Ω_{φ,E}`, else
/// `2^{n-1}` half-size cubes on its top face. The flag reports an
/// unsettled containment test.
fn children_of(
    profile: &HolderProfile,
    q: &Cube,
    unit: f64,
    domain: i64,
    level: u32,
) -> (Vec<Cube>, bool) {
    let d = profile.base_dim();
    let e = q.edge;
    // base of the dilated cube: [base - e, base + 2e]; top: top + 2e
    let inside_base = (0..d).all(|i| q.base[i] - e >= -domain && q.base[i] + 2 * e <= domain);
    let decision = if inside_base {
        let lo: Vec<f64> = (0..d).map(|i| (q.base[i] - e) as f64 * unit).collect();
        let hi: Vec<f64> = (0..d).map(|i| (q.base[i] + 2 * e) as f64 * unit).collect();
        profile.min_at_least(&lo, &hi, (q.top() + 2 * e) as f64 * unit)
    } else {
        Decision::No
    };
    if decision == Decision::Yes {
        let child = Cube {
            bottom: q.top(),
            level,
            ..*q
        };
        return (vec![child], false);
    }
    let h = e / 2;
    let mut kids = Vec::with_capacity(1 << d);
    for mask in 0..(1usize << d) {
        let mut base = q.base;
        for (i, b) in base.iter_mut().enumerate().take(d) {
            if mask >> (d - 1 - i) & 1 == 1 {
                *b += h;
            }
        }
        kids.push(Cube {
            base,
            bottom: q.top(),
            edge: h,
            size_index: q.size_index + 1,
            level,
        });
    }
    (kids, decision == Decision::Inconclusive)
}
