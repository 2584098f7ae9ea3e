use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::build::CubeCovering;
use super::CoveringError;

/// `ℙ_i(t)` and `𝕎_i(t)` keyed by size index `i` (`ℓ_r = ℓ 2^{-i}`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountingProfile {
    pub path: BTreeMap<u32, usize>,
    pub shadow: BTreeMap<u32, usize>,
}

/// Counts cubes of each size on the path `r ⪯ t` (root included) and in the
/// shadow `r ⪰ t`, by walking the tree.
pub fn counting_profiles(cov: &CubeCovering, t: usize) -> Result<CountingProfile, CoveringError> {
    let tree = cov.tree();
    if t >= tree.vertex_count() || t == tree.root() {
        return Err(CoveringError::InvalidVertex(t));
    }
    let mut path = BTreeMap::new();
    let mut r = Some(t);
    while let Some(v) = r {
        *path.entry(cov.cube(v).size_index).or_insert(0) += 1;
        r = tree.parent(v);
    }
    let mut shadow = BTreeMap::new();
    for &s in tree.subtree_preorder(t) {
        *shadow.entry(cov.cube(s).size_index).or_insert(0) += 1;
    }
    Ok(CountingProfile { path, shadow })
}

/// Smallest constants making the three counting bounds hold on a covering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedConstants {
    /// `ℙ_i(t) <= C₁ 2^{i(1-α)}`.
    pub c1: f64,
    /// `𝕎_i(t) <= C₂ 2^{-k(n-1) - i(α-n)}` with `ℓ_t = ℓ 2^{-k}`.
    pub c2: f64,
    /// `|W_t| <= C₃ ℓ_t^{n-1+α} (K_φ + ℓ_t^{1-α})`.
    pub c3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingReport {
    pub depth: u32,
    pub constants: FittedConstants,
    pub previous_depth: u32,
    pub previous: FittedConstants,
    /// Largest relative change of a constant between the two depths.
    pub max_relative_change: f64,
    pub stable: bool,
}

/// `|W_t| = Σ_{k⪰t} |Q_k| + |B_t|`, the volume of `⋃_{k⪰t} U_k`.
pub fn shadow_volumes(cov: &CubeCovering) -> Vec<f64> {
    let tree = cov.tree();
    let mut acc: Vec<f64> = (0..cov.len()).map(|t| cov.volume(t)).collect();
    for &t in tree.preorder().iter().rev() {
        if let Some(p) = tree.parent(t) {
            acc[p] += acc[t];
        }
    }
    for t in tree.star_vertices() {
        acc[t] += cov.slab_volume(t);
    }
    acc
}

pub fn fit_constants(cov: &CubeCovering) -> FittedConstants {
    let tree = cov.tree();
    let pr = &cov.profile;
    let (alpha, n) = (pr.alpha, pr.n as f64);
    let sizes = cov.depth_max as usize + 1;
    let idx = |t: usize| cov.cube(t).size_index as usize;

    let mut path = vec![vec![0u32; sizes]; cov.len()];
    for &t in tree.preorder() {
        if let Some(p) = tree.parent(t) {
            path[t] = path[p].clone();
        }
        path[t][idx(t)] += 1;
    }
    let mut shadow = vec![vec![0u32; sizes]; cov.len()];
    for &t in tree.preorder().iter().rev() {
        shadow[t][idx(t)] += 1;
        if let Some(p) = tree.parent(t) {
            let (a, b) = if p < t {
                let (lo, hi) = shadow.split_at_mut(t);
                (&mut lo[p], &hi[0])
            } else {
                let (lo, hi) = shadow.split_at_mut(p);
                (&mut hi[0], &lo[t])
            };
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
    let vols = shadow_volumes(cov);
    let star: Vec<usize> = tree.star_vertices().collect();
    let fold = |f: &(dyn Fn(usize) -> f64 + Sync)| star.par_iter().map(|&t| f(t)).reduce(|| 0.0, f64::max);
    let c1 = fold(&|t| {
        (0..sizes)
            .map(|i| path[t][i] as f64 / 2f64.powf(i as f64 * (1.0 - alpha)))
            .fold(0.0, f64::max)
    });
    let c2 = fold(&|t| {
        let k = idx(t) as f64;
        (0..sizes)
            .map(|i| {
                let bound = 2f64.powf(-k * (n - 1.0) - i as f64 * (alpha - n));
                shadow[t][i] as f64 / bound
            })
            .fold(0.0, f64::max)
    });
    let c3 = fold(&|t| {
        let l = cov.edge(t);
        vols[t] / (l.powf(n - 1.0 + alpha) * (pr.k_phi + l.powf(1.0 - alpha)))
    });
    FittedConstants { c1, c2, c3 }
}

/// Fits the constants at `depth_max` and at `depth_max - 2` and compares.
pub fn verify_counting_bounds(cov: &CubeCovering) -> CountingReport {
    let depth = cov.depth_max;
    let previous_depth = depth.saturating_sub(2);
    let constants = fit_constants(cov);
    let previous = fit_constants(&cov.truncate(previous_depth));
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let max_relative_change = rel(constants.c1, previous.c1)
        .max(rel(constants.c2, previous.c2))
        .max(rel(constants.c3, previous.c3));
    CountingReport {
        depth,
        constants,
        previous_depth,
        previous,
        max_relative_change,
        stable: max_relative_change <= 0.10,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryReport {
    pub cubes: usize,
    pub disjoint: bool,
    /// Volume of the union of leaf columns, `Σ_leaves |Q'_t| · top_t`.
    pub column_volume: f64,
    pub total_volume: f64,
    pub covered: bool,
    /// Every cube satisfies `top_t + ℓ_t <= φ` at sampled base points.
    pub inside_domain: bool,
    pub slabs_nested: bool,
    pub max_overlap: usize,
    pub enlarged_to_slab_ratio: f64,
}

impl GeometryReport {
    pub fn ok(&self) -> bool {
        self.disjoint && self.covered && self.inside_domain && self.slabs_nested && self.max_overlap <= 2
    }
}

fn boxes_overlap(a: &[(i64, i64)], b: &[(i64, i64)]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.0 < y.1 && y.0 < x.1)
}

/// Sweep over boxes sorted by their first coordinate.
fn pairwise_disjoint(boxes: &[Vec<(i64, i64)>]) -> bool {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by_key(|&t| boxes[t][0].0);
    (0..order.len()).into_par_iter().all(|i| {
        let a = &boxes[order[i]];
        order[i + 1..]
            .iter()
            .take_while(|&&j| boxes[j][0].0 < a[0].1)
            .all(|&j| !boxes_overlap(a, &boxes[j]))
    })
}

/// Exact integer checks of disjointness, coverage, slab placement and the
/// overlap count of the enlarged sets.
pub fn verify_geometry(cov: &CubeCovering) -> GeometryReport {
    let tree = cov.tree();
    let d = cov.profile.base_dim();
    let boxes: Vec<Vec<(i64, i64)>> = cov
        .cubes()
        .iter()
        .map(|q| {
            let mut b: Vec<(i64, i64)> = (0..d).map(|i| (q.base[i], q.base[i] + q.edge)).collect();
            b.push((q.bottom, q.top()));
            b
        })
        .collect();
    // B_t: the lower half-cube slab under Q_t
    let slab = |t: usize| {
        let q = cov.cube(t);
        let mut b = boxes[t].clone();
        b[d] = (q.bottom - q.edge / 2, q.bottom);
        b
    };

    let disjoint = pairwise_disjoint(&boxes);

    let u = cov.unit();
    let n = cov.profile.n as i32;
    let total_volume: f64 = (0..cov.len()).map(|t| cov.volume(t)).sum();
    let column_volume: f64 = tree
        .preorder()
        .iter()
        .filter(|&&t| tree.children(t).is_empty())
        .map(|&t| {
            let q = cov.cube(t);
            (q.edge as f64 * u).powi(n - 1) * (q.top() as f64 * u)
        })
        .sum();
    // children partition the parent's base and sit on its top face
    let stacked = tree.preorder().iter().all(|&t| {
        let kids = tree.children(t);
        let q = cov.cube(t);
        let area: i64 = kids.iter().map(|&k| cov.cube(k).edge.pow(d as u32)).sum();
        kids.is_empty()
            || (area == q.edge.pow(d as u32)
                && kids.iter().all(|&k| {
                    let c = cov.cube(k);
                    c.bottom == q.top()
                        && (0..d).all(|i| c.base[i] >= q.base[i] && c.base[i] + c.edge <= q.base[i] + q.edge)
                }))
    });
    let covered = stacked && (total_volume - column_volume).abs() <= 1e-10 * column_volume;

    let inside_domain = (0..cov.len()).into_par_iter().all(|t| {
        let q = cov.cube(t);
        let target = (q.top() + q.edge) as f64 * u;
        let m = 4usize;
        let pts: Vec<Vec<f64>> = (0..(m + 1).pow(d as u32))
            .map(|k| {
                (0..d)
                    .map(|i| {
                        let j = (k / (m + 1).pow(i as u32)) % (m + 1);
                        (q.base[i] as f64 + q.edge as f64 * j as f64 / m as f64) * u
                    })
                    .collect()
            })
            .collect();
        pts.iter().all(|x| cov.profile.phi(x) >= target - 1e-12 * cov.profile.ell)
    });

    let slabs_nested = tree.star_vertices().all(|t| {
        let p = tree.parent(t).expect("non-root");
        let s = slab(t);
        s.iter().zip(&boxes[p]).all(|(a, b)| a.0 >= b.0 && a.1 <= b.1)
    });

    // U_t = Q_t ∪ B_t with B_t inside the parent cube: if the slabs are
    // pairwise disjoint and nested, a point of Q_t lies in U_t and in at
    // most one U_s through B_s.
    let slabs: Vec<Vec<(i64, i64)>> = tree.star_vertices().map(slab).collect();
    let max_overlap = match (slabs.is_empty(), slabs_nested && pairwise_disjoint(&slabs)) {
        (true, _) => 1,
        (false, true) => 2,
        (false, false) => 3,
    };

    let ratio = tree
        .star_vertices()
        .map(|t| cov.enlarged_volume(t) / cov.slab_volume(t))
        .fold(f64::NAN, |a, b| if a.is_nan() { b } else { a.max(b) });

    GeometryReport {
        cubes: cov.len(),
        disjoint,
        column_volume,
        total_volume,
        covered,
        inside_domain,
        slabs_nested,
        max_overlap,
        enlarged_to_slab_ratio: ratio,
    }
}

/// Range of `d_G(center of Q_t) / ℓ_t` over all cubes.
pub fn admissibility_range(cov: &CubeCovering) -> (f64, f64) {
    (0..cov.len())
        .into_par_iter()
        .map(|t| {
            let r = cov.profile.distance_to_graph(&cov.center(t)) / cov.edge(t);
            (r, r)
        })
        .reduce(
            || (f64::INFINITY, 0.0),
            |a, b| (a.0.min(b.0), a.1.max(b.1)),
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{build_covering, HolderProfile};

    #[test]
    fn flat_profiles() {
        let cov = build_covering(&HolderProfile::flat(), 4, 1000).unwrap();
        // vertex 1 is the first root child, ℓ = 1/2
        let cp = counting_profiles(&cov, 1).unwrap();
        assert_eq!(cp.path.get(&0), Some(&1));
        assert_eq!(cp.path.get(&1), Some(&1));
        let total: usize = cp.shadow.values().sum();
        assert_eq!(total, cov.tree().subtree_preorder(1).len());
        assert!(cp.path.values().all(|&c| c <= 1));
        // 𝕎_k(t) = 1 for the size of t itself
        assert_eq!(cp.shadow.get(&1), Some(&1));
        assert!(counting_profiles(&cov, 0).is_err());
    }

    #[test]
    fn flat_geometry_and_constants() {
        let cov = build_covering(&HolderProfile::flat(), 6, 10_000).unwrap();
        let g = verify_geometry(&cov);
        assert!(g.ok(), "{g:?}");
        assert_eq!(g.enlarged_to_slab_ratio, 3.0);
        let c = fit_constants(&cov);
        assert_eq!(c.c1, 1.0);
        assert!(c.c2 >= 1.0);
    }

    #[test]
    fn shadow_volume_of_leaf() {
        let cov = build_covering(&HolderProfile::demo(0.5), 3, 1000).unwrap();
        let v = shadow_volumes(&cov);
        let leaf = cov.len() - 1;
        assert!((v[leaf] - 1.5 * cov.volume(leaf)).abs() < 1e-15);
    }
}
