use serde::Serialize;

use super::{a_tree, HardyError, HardyProblem};

pub const DEFAULT_THETA_MAX: f64 = 64.0;
pub const THETA_GRID_POINTS: usize = 64;
const THETA_MIN_OFFSET: f64 = 1e-3;
const GOLDEN_REL_WIDTH: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaOptimum {
    pub theta_star: f64,
    /// `(θ*/(θ*-1))^{1/q} A_tree(θ*)`.
    pub suff_bound: f64,
    pub a_tree: f64,
    /// `(θ, g(θ))` on the logarithmic grid.
    pub grid: Vec<(f64, f64)>,
}

/// Grid `θ = 1 + 10^x`, `x` uniform between `log10(1e-3)` and
/// `log10(θ_max - 1)`.
pub fn theta_grid(theta_max: f64) -> Vec<f64> {
    let lo = THETA_MIN_OFFSET.log10();
    let hi = (theta_max - 1.0).log10();
    let m = THETA_GRID_POINTS - 1;
    (0..THETA_GRID_POINTS)
        .map(|i| {
            let x = if i == m {
                hi
            } else {
                lo + (hi - lo) * i as f64 / m as f64
            };
            1.0 + 10f64.powf(x)
        })
        .collect()
}

fn objective(problem: &HardyProblem, theta: f64) -> Result<(f64, f64), HardyError> {
    let at = a_tree(problem, theta)?.value;
    let g = (theta / (theta - 1.0)).powf(1.0 / problem.q()) * at;
    Ok((g, at))
}

/// Minimizes `g(θ) = (θ/(θ-1))^{1/q} A_tree(θ)` over `(1, θ_max]`.
pub fn optimize_theta(problem: &HardyProblem, theta_max: f64) -> Result<ThetaOptimum, HardyError> {
    if !(theta_max > 1.0 + THETA_MIN_OFFSET && theta_max.is_finite()) {
        return Err(HardyError::ThetaOutOfRange(theta_max));
    }
    let thetas = theta_grid(theta_max);
    let mut grid = Vec::with_capacity(thetas.len());
    for &th in &thetas {
        grid.push((th, objective(problem, th)?.0));
    }
    let best = grid
        .iter()
        .enumerate()
        .filter(|(_, (_, g))| g.is_finite())
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .ok_or(HardyError::Unbounded)?;

    let mut lo = thetas[best.saturating_sub(1)];
    let mut hi = thetas[(best + 1).min(thetas.len() - 1)];
    let (mut theta_star, mut g_star) = grid[best];
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = objective(problem, x1)?.0;
    let mut f2 = objective(problem, x2)?.0;
    while hi - lo > GOLDEN_REL_WIDTH * lo {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = objective(problem, x1)?.0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = objective(problem, x2)?.0;
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f < g_star {
            theta_star = x;
            g_star = f;
        }
    }
    let (suff_bound, at) = objective(problem, theta_star)?;
    Ok(ThetaOptimum {
        theta_star,
        suff_bound,
        a_tree: at,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::a_chain;
    use crate::tree::RootedTree;

    #[test]
    fn grid_shape() {
        let g = theta_grid(64.0);
        assert_eq!(g.len(), 64);
        assert!((g[0] - 1.001).abs() < 1e-15);
        assert_eq!(g[63], 64.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_vertex_prefers_theta_max() {
        let pr = HardyProblem::new(RootedTree::chain(1), vec![2.0], vec![3.0], 2.0).unwrap();
        let opt = optimize_theta(&pr, 64.0).unwrap();
        assert!(opt.theta_star > 63.9);
        let expected = (64.0f64 / 63.0).sqrt() * 1.5;
        assert!((opt.suff_bound - expected).abs() < 1e-4);
    }

    #[test]
    fn two_chain_sample_and_chain_bound() {
        let pr = HardyProblem::unit(RootedTree::chain(2), 2.0).unwrap();
        let (g2, _) = objective(&pr, 2.0).unwrap();
        assert!((g2 - 2.19737).abs() < 1e-5);
        let opt = optimize_theta(&pr, 64.0).unwrap();
        let th = opt.theta_star;
        let ac = a_chain(&pr).value;
        let bound = (th / (th - 1.0)).powf(0.5) * th.powf(0.5) * ac;
        assert!(opt.suff_bound <= bound * (1.0 + 1e-12));
        assert!(opt.grid.iter().all(|&(_, g)| opt.suff_bound <= g * (1.0 + 1e-12)));
    }

    #[test]
    fn rejects_bad_range() {
        let pr = HardyProblem::unit(RootedTree::chain(2), 2.0).unwrap();
        assert!(optimize_theta(&pr, 1.0).is_err());
    }
}
