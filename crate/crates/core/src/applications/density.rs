use serde::Serialize;

use super::functions::TestFunction;
use super::ApplicationError;
use crate::covering::CubeCovering;
use crate::decomp::{CellFunction, TreePartition};

/// Output of [`density_split`]. Norms are in `L^q(ω^{-q})`, `q = p'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySplit {
    pub g: Vec<f64>,
    pub psi: f64,
    /// Deepest level kept in `Ω_ε`.
    pub level: usize,
    pub tail_norm: f64,
    pub g_norm: f64,
    /// `‖g_F + ψ_F ω^p‖`.
    pub reference_norm: f64,
    pub integral: f64,
    pub estimate_ok: bool,
}

/// Samples `f` at the center of each fragment's owner cube.
pub fn sample_on_covering(cov: &CubeCovering, part: &TreePartition, f: &TestFunction) -> CellFunction {
    let values = part
        .fragments()
        .iter()
        .map(|fr| f.value(&cov.center(fr.owner)))
        .collect();
    CellFunction { values }
}

fn weighted_norm(part: &TreePartition, values: &[f64], q: f64) -> f64 {
    part.fragments()
        .iter()
        .zip(values)
        .map(|(fr, v)| fr.volume * (v.abs() / fr.omega).powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// `ψ_F = ∫F / ∫ω^p`, `h_F = F - ψ_F ω^p`; `Ω_ε` is the union of the cores
/// up to the first level `m` (below the tree height) where the tail of `h_F`
/// has norm `< ε`, and
/// `g_F = χ_{Ω_ε} h_F + χ_B ω^p ∫_{Ω∖Ω_ε} h_F / ∫_B ω^p` with `B = Q_a`.
pub fn density_split(
    part: &TreePartition,
    f: &CellFunction,
    p: f64,
    epsilon: f64,
) -> Result<DensitySplit, ApplicationError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(ApplicationError::InvalidParameter(format!("p = {p} must lie in (1, ∞)")));
    }
    if !(epsilon > 0.0) {
        return Err(ApplicationError::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    if f.values.len() != part.len() {
        return Err(ApplicationError::InvalidParameter(format!(
            "{} values for {} fragments",
            f.values.len(),
            part.len()
        )));
    }
    let q = p / (p - 1.0);
    let tree = part.tree();
    let frags = part.fragments();
    let wp: Vec<f64> = frags.iter().map(|fr| fr.omega.powf(p)).collect();
    let mass: f64 = frags.iter().zip(&wp).map(|(fr, w)| fr.volume * w).sum();
    let psi = f.integral(part) / mass;
    let h: Vec<f64> = f.values.iter().zip(&wp).map(|(v, w)| v - psi * w).collect();
    let level: Vec<usize> = frags.iter().map(|fr| tree.depth(fr.owner)).collect();

    // tail^q by level, accumulated from the bottom
    let height = tree.height();
    let mut by_level = vec![0.0; height + 2];
    for (c, fr) in frags.iter().enumerate() {
        by_level[level[c]] += fr.volume * (h[c].abs() / fr.omega).powf(q);
    }
    let mut tail = vec![0.0; height + 2];
    for m in (0..=height).rev() {
        tail[m] = tail[m + 1] + by_level[m + 1];
    }
    let m = (0..height.max(1))
        .find(|&m| tail[m].powf(1.0 / q) < epsilon)
        .ok_or(ApplicationError::EpsilonTooSmall {
            epsilon,
            smallest_tail: tail[height.saturating_sub(1)].powf(1.0 / q),
        })?;

    let root = tree.root();
    let outside: f64 = (0..frags.len())
        .filter(|&c| level[c] > m)
        .map(|c| frags[c].volume * h[c])
        .sum();
    let ball: f64 = part.core(root).iter().map(|&c| frags[c].volume * wp[c]).sum();
    let mut g: Vec<f64> = (0..frags.len()).map(|c| if level[c] <= m { h[c] } else { 0.0 }).collect();
    for &c in part.core(root) {
        g[c] += wp[c] * outside / ball;
    }
    let g_norm = weighted_norm(part, &g, q);
    let reference: Vec<f64> = g.iter().zip(&wp).map(|(v, w)| v + psi * w).collect();
    let reference_norm = weighted_norm(part, &reference, q);
    let integral = frags.iter().zip(&g).map(|(fr, v)| fr.volume * v).sum();
    Ok(DensitySplit {
        g,
        psi,
        level: m,
        tail_norm: tail[m].powf(1.0 / q),
        g_norm,
        reference_norm,
        integral,
        estimate_ok: g_norm <= 2.0 * reference_norm * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{build_covering, HolderProfile, WeightSpec};

    fn setup() -> (CubeCovering, TreePartition) {
        let cov = build_covering(&HolderProfile::demo(0.5), 6, 100_000).unwrap();
        let part = TreePartition::from_covering(&cov, WeightSpec::critical(-0.2, 0.5, 2.0));
        (cov, part)
    }

    #[test]
    fn zero_input() {
        let (_, part) = setup();
        let r = density_split(&part, &CellFunction::zero(&part), 2.0, 1e-3).unwrap();
        assert_eq!(r.psi, 0.0);
        assert!(r.g.iter().all(|&v| v == 0.0));
        assert_eq!(r.level, 0);
    }

    #[test]
    fn weight_itself_has_psi_one() {
        let (_, part) = setup();
        let values = part.fragments().iter().map(|fr| fr.omega.powf(2.0)).collect();
        let r = density_split(&part, &CellFunction { values }, 2.0, 1e-3).unwrap();
        assert!((r.psi - 1.0).abs() < 1e-14);
        assert!(r.g.iter().all(|v| v.abs() < 1e-12));
        assert!(r.integral.abs() < 1e-12);
    }

    #[test]
    fn compact_mean_zero_input_is_kept() {
        let (_, part) = setup();
        let root = part.tree().root();
        let core = part.core(root);
        let mut values = vec![0.0; part.len()];
        // two root fragments with opposite mass
        let (a, b) = (core[0], core[1]);
        values[a] = 1.0 / part.fragments()[a].volume;
        values[b] = -1.0 / part.fragments()[b].volume;
        let f = CellFunction { values };
        let r = density_split(&part, &f, 2.0, 1e-9).unwrap();
        assert!(r.psi.abs() < 1e-14);
        for (x, y) in r.g.iter().zip(&f.values) {
            assert!((x - y).abs() < 1e-12 * y.abs().max(1.0));
        }
        assert!(r.estimate_ok);
    }

    #[test]
    fn sampled_function_split() {
        let (cov, part) = setup();
        let f = sample_on_covering(&cov, &part, &TestFunction::Sine { axis: 0, freq: 5.0 });
        let r = density_split(&part, &f, 2.0, 0.2).unwrap();
        assert!(r.integral.abs() < 1e-12 * f.l1(&part).max(1.0));
        assert!(r.tail_norm < 0.2);
        assert!(r.estimate_ok, "{r:?}");
        assert!(matches!(
            density_split(&part, &f, 2.0, 1e-300),
            Err(ApplicationError::EpsilonTooSmall { .. })
        ));
    }
}
