use rayon::prelude::*;

use crate::covering::CubeCovering;

/// Quadrature domain for the inequality checkers.
#[derive(Debug, Clone)]
pub enum Domain {
    /// `(0, 1)^n` with the exact distance to the boundary.
    UnitCube { n: usize },
    /// The union of the cubes of a covering of `Ω_φ`; `d` is the distance to
    /// the graph at each cube's center, held constant on the cube.
    Covered(Box<CoveredDomain>),
}

#[derive(Debug, Clone)]
pub struct CoveredDomain {
    pub covering: CubeCovering,
    /// `d_G(center of Q_t)` per cube.
    pub distance: Vec<f64>,
}

/// An axis-aligned box stratum.
#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub lo: Vec<f64>,
    pub edge: f64,
    pub volume: f64,
}

/// Strata per axis for the unit cube.
const CUBE_STRATA: usize = 16;

impl Domain {
    pub fn covered(covering: CubeCovering) -> Self {
        let distance = (0..covering.len())
            .into_par_iter()
            .map(|t| covering.profile.distance_to_graph(&covering.center(t)))
            .collect();
        Domain::Covered(Box::new(CoveredDomain { covering, distance }))
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::UnitCube { n } => *n,
            Domain::Covered(c) => c.covering.profile.n,
        }
    }

    /// Hölder exponent of the boundary.
    pub fn alpha(&self) -> f64 {
        match self {
            Domain::UnitCube { .. } => 1.0,
            Domain::Covered(c) => c.covering.profile.alpha,
        }
    }

    pub fn strata(&self) -> Vec<Stratum> {
        match self {
            Domain::UnitCube { n } => {
                let m = CUBE_STRATA;
                let edge = 1.0 / m as f64;
                let count = m.pow(*n as u32);
                (0..count)
                    .map(|k| {
                        let mut rest = k;
                        let lo = (0..*n)
                            .map(|_| {
                                let i = rest % m;
                                rest /= m;
                                i as f64 * edge
                            })
                            .collect();
                        Stratum {
                            lo,
                            edge,
                            volume: edge.powi(*n as i32),
                        }
                    })
                    .collect()
            }
            Domain::Covered(c) => {
                let cov = &c.covering;
                (0..cov.len())
                    .map(|t| {
                        let q = cov.cube(t);
                        let u = cov.unit();
                        let d = cov.profile.base_dim();
                        let mut lo: Vec<f64> = (0..d).map(|i| q.base[i] as f64 * u).collect();
                        lo.push(q.bottom as f64 * u);
                        Stratum {
                            lo,
                            edge: cov.edge(t),
                            volume: cov.volume(t),
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Domain::UnitCube { .. } => 1.0,
            Domain::Covered(c) => (0..c.covering.len()).map(|t| c.covering.volume(t)).sum(),
        }
    }

    /// Distance surrogate at `x`, which lies in stratum `k`.
    pub fn distance_in(&self, k: usize, x: &[f64]) -> f64 {
        match self {
            Domain::UnitCube { .. } => unit_cube_distance(x),
            Domain::Covered(c) => c.distance[k],
        }
    }

    /// Distance surrogate at an arbitrary point, `None` outside the domain.
    pub fn distance(&self, x: &[f64]) -> Option<f64> {
        match self {
            Domain::UnitCube { .. } => {
                if x.iter().all(|&v| v > 0.0 && v < 1.0) {
                    Some(unit_cube_distance(x))
                } else {
                    None
                }
            }
            Domain::Covered(c) => c.locate(x).map(|t| c.distance[t]),
        }
    }
}

fn unit_cube_distance(x: &[f64]) -> f64 {
    x.iter().fold(f64::INFINITY, |a, &v| a.min(v).min(1.0 - v))
}

impl CoveredDomain {
    /// Cube containing `x`, found by walking up the columns of the tree.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let cov = &self.covering;
        let u = cov.unit();
        let d = cov.profile.base_dim();
        let inside_base = |t: usize| {
            let q = cov.cube(t);
            (0..d).all(|i| {
                let lo = q.base[i] as f64 * u;
                x[i] >= lo && x[i] < lo + q.edge as f64 * u
            })
        };
        let mut t = cov.tree().root();
        if !inside_base(t) || x[d] < 0.0 {
            return None;
        }
        loop {
            let q = cov.cube(t);
            if x[d] < q.top() as f64 * u {
                return Some(t);
            }
            t = *cov.tree().children(t).iter().find(|&&s| inside_base(s))?;
        }
    }
}
