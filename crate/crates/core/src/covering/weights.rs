use serde::Serialize;

use super::build::CubeCovering;
use crate::hardy::{assemble_uv, HardyError, HardyProblem};

/// Distance-power weights `ν = d^γ`, `ω = d^β` with `ℓ_t` as the distance
/// surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightSpec {
    pub beta: f64,
    pub gamma: f64,
    pub p: f64,
}

impl WeightSpec {
    /// The critical shift `γ = β + α - 1`.
    pub fn critical(beta: f64, alpha: f64, p: f64) -> Self {
        Self {
            beta,
            gamma: beta + alpha - 1.0,
            p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedProblem {
    pub problem: HardyProblem,
    pub spec: WeightSpec,
    /// `βp > -α`.
    pub beta_admissible: bool,
    /// `γ <= β + α - 1`.
    pub gamma_admissible: bool,
}

/// `u_t = |B_t|^{1/p} ℓ_t^γ`, `v_t = |B_t|^{1/p} ℓ_t^β` on the covering tree.
pub fn weights_from_beta(cov: &CubeCovering, spec: WeightSpec) -> Result<WeightedProblem, HardyError> {
    let tree = cov.tree().clone();
    let star: Vec<usize> = tree.star_vertices().collect();
    let volumes: Vec<f64> = star.iter().map(|&t| cov.slab_volume(t)).collect();
    let nu: Vec<f64> = star.iter().map(|&t| cov.edge(t).powf(spec.gamma)).collect();
    let omega: Vec<f64> = star.iter().map(|&t| cov.edge(t).powf(spec.beta)).collect();
    let alpha = cov.profile.alpha;
    Ok(WeightedProblem {
        problem: assemble_uv(tree, &volumes, &nu, &omega, spec.p)?,
        spec,
        beta_admissible: spec.beta * spec.p > -alpha,
        gamma_admissible: spec.gamma <= spec.beta + alpha - 1.0 + 1e-12,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailProfile {
    /// `Σ_{level(t)=m} v_t^p` for `m = 1..=depth`.
    pub level_sums: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// Consecutive ratios of the level sums.
    pub ratios: Vec<f64>,
    /// Last three ratios below one and within 5% of each other.
    pub geometric_decay: bool,
}

/// Per-level sums of `v_t^p = |B_t| ℓ_t^{βp}`.
pub fn tail_integrability(cov: &CubeCovering, beta: f64, p: f64) -> TailProfile {
    let depth = cov.depth_max as usize;
    let mut level_sums = vec![0.0; depth];
    for t in cov.tree().star_vertices() {
        let lvl = cov.cube(t).level as usize;
        level_sums[lvl - 1] += cov.slab_volume(t) * cov.edge(t).powf(beta * p);
    }
    let cumulative = level_sums
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let ratios: Vec<f64> = level_sums.windows(2).map(|w| w[1] / w[0]).collect();
    let geometric_decay = ratios.len() >= 3 && {
        let tail = &ratios[ratios.len() - 3..];
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        hi < 1.0 && hi <= 1.05 * lo
    };
    TailProfile {
        level_sums,
        cumulative,
        ratios,
        geometric_decay,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{build_covering, HolderProfile};

    #[test]
    fn lipschitz_unweighted() {
        let cov = build_covering(&HolderProfile::flat(), 3, 1000).unwrap();
        let w = weights_from_beta(&cov, WeightSpec::critical(0.0, 1.0, 2.0)).unwrap();
        let pr = &w.problem;
        for t in cov.tree().star_vertices() {
            let expect = cov.slab_volume(t).sqrt();
            assert!((pr.u_at(t) - expect).abs() < 1e-15);
            assert!((pr.v_at(t) - expect).abs() < 1e-15);
        }
        assert!(w.beta_admissible && w.gamma_admissible);
    }

    #[test]
    fn stokes_choice() {
        let cov = build_covering(&HolderProfile::demo(0.5), 3, 1000).unwrap();
        let alpha = 0.5;
        let w = weights_from_beta(&cov, WeightSpec::critical(1.0 - alpha, alpha, 2.0)).unwrap();
        assert_eq!(w.spec.gamma, 0.0);
        for t in cov.tree().star_vertices() {
            let s = cov.slab_volume(t).sqrt();
            assert!((w.problem.u_at(t) - s).abs() < 1e-15);
            assert!((w.problem.v_at(t) - s * cov.edge(t).powf(0.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_predicate() {
        let cov = build_covering(&HolderProfile::demo(0.5), 2, 100).unwrap();
        assert!(weights_from_beta(&cov, WeightSpec::critical(-0.2, 0.5, 2.0)).unwrap().beta_admissible);
        assert!(!weights_from_beta(&cov, WeightSpec::critical(-0.3, 0.5, 2.0)).unwrap().beta_admissible);
        let loose = WeightSpec { beta: 0.0, gamma: 0.5, p: 2.0 };
        assert!(!weights_from_beta(&cov, loose).unwrap().gamma_admissible);
    }

    #[test]
    fn flat_tail_rates() {
        // flat: level m has 2^m cubes of edge 2^{-m}, so v^p sums to
        // 2^m 2^{-2m-1} 2^{-mβp} and the ratio is 2^{-(1+βp)}
        let cov = build_covering(&HolderProfile::flat(), 8, 10_000).unwrap();
        let tp = tail_integrability(&cov, -0.2, 2.0);
        for r in &tp.ratios {
            assert!((r - 2f64.powf(-0.6)).abs() < 1e-12);
        }
        assert!(tp.geometric_decay);
        let tp = tail_integrability(&cov, -0.7, 2.0);
        assert!(!tp.geometric_decay);
        assert!(tp.cumulative.windows(2).all(|w| w[1] > w[0]));
    }
}
