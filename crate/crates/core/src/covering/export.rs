use std::fmt::Write;

use num_rational::Ratio;
use serde::Serialize;

use super::build::CubeCovering;
use super::profile::HolderProfile;
use super::weights::TailProfile;

/// Reduced fraction `[numerator, denominator]` in units of `ℓ`.
type Frac = [i64; 2];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeJson {
    pub id: usize,
    pub parent: Option<usize>,
    pub level: u32,
    pub base: Vec<Frac>,
    pub bottom: Frac,
    pub edge: Frac,
    pub ell_t: f64,
    pub slab_volume: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringJson {
    pub profile: HolderProfile,
    pub depth_max: u32,
    pub cube_count: usize,
    pub level_counts: Vec<usize>,
    pub inconclusive_tests: usize,
    pub edges: Vec<[usize; 2]>,
    pub cubes: Vec<CubeJson>,
}

fn frac(num: i64, unit_exp: u32) -> Frac {
    let r = Ratio::new(num, 1i64 << unit_exp);
    [*r.numer(), *r.denom()]
}

pub fn covering_json(cov: &CubeCovering) -> CoveringJson {
    let tree = cov.tree();
    let e = cov.unit_exp;
    let d = cov.profile.base_dim();
    let cubes = (0..cov.len())
        .map(|t| {
            let q = cov.cube(t);
            CubeJson {
                id: t,
                parent: tree.parent(t),
                level: q.level,
                base: (0..d).map(|i| frac(q.base[i], e)).collect(),
                bottom: frac(q.bottom, e),
                edge: frac(q.edge, e),
                ell_t: cov.edge(t),
                slab_volume: tree.parent(t).map(|_| cov.slab_volume(t)),
            }
        })
        .collect();
    CoveringJson {
        profile: cov.profile,
        depth_max: cov.depth_max,
        cube_count: cov.len(),
        level_counts: cov.level_counts(),
        inconclusive_tests: cov.inconclusive_tests,
        edges: tree.edges().into_iter().map(|(c, p)| [c, p]).collect(),
        cubes,
    }
}

/// Plot-ready per-level table.
pub fn level_csv(cov: &CubeCovering, tail: Option<&TailProfile>) -> String {
    let counts = cov.level_counts();
    let mut out = String::from("level,cubes");
    if tail.is_some() {
        out.push_str(",level_sum_vp,cumulative_vp");
    }
    out.push('\n');
    for (m, c) in counts.iter().enumerate() {
        write!(out, "{m},{c}").expect("writing to a string");
        if let Some(tp) = tail {
            if m == 0 {
                out.push_str(",,");
            } else {
                write!(out, ",{:e},{:e}", tp.level_sums[m - 1], tp.cumulative[m - 1])
                    .expect("writing to a string");
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{build_covering, tail_integrability};

    #[test]
    fn fractions_are_reduced() {
        let cov = build_covering(&HolderProfile::flat(), 2, 100).unwrap();
        let j = covering_json(&cov);
        assert_eq!(j.cubes[0].base, vec![[-1, 2]]);
        assert_eq!(j.cubes[0].edge, [1, 1]);
        assert_eq!(j.cubes[1].bottom, [1, 1]);
        assert_eq!(j.cubes[1].edge, [1, 2]);
        assert_eq!(j.cubes[0].slab_volume, None);
        assert_eq!(j.edges.len(), 6);
    }

    #[test]
    fn csv_shape() {
        let cov = build_covering(&HolderProfile::flat(), 3, 100).unwrap();
        let tp = tail_integrability(&cov, 0.0, 2.0);
        let csv = level_csv(&cov, Some(&tp));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "level,cubes,level_sum_vp,cumulative_vp");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0,1,"));
        assert_eq!(level_csv(&cov, None).lines().nth(2), Some("1,2"));
    }
}
