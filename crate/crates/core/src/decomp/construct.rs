use rayon::prelude::*;
use serde::Serialize;

use super::partition::{CellFunction, TreePartition};
use super::DecompError;
use crate::hardy::HardyProblem;

/// Relative tolerance on `∫g` accepted as zero mean.
pub const MEAN_TOL: f64 = 1e-12;

/// One part `g_t`, stored on the fragments of `U_t` only; every other
/// fragment is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Part {
    pub vertex: usize,
    pub cells: Vec<(usize, f64)>,
}

impl Part {
    pub fn integral(&self, part: &TreePartition) -> f64 {
        self.cells
            .iter()
            .map(|&(c, v)| v * part.fragments()[c].volume)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub parts: Vec<Part>,
    /// `S_t = Σ_{k⪰t} ∫_{Q_k} g`, the mass moved through `B_t`.
    pub shadow_integrals: Vec<f64>,
    /// `Σ_t ∫_{U_t} |g_t|^q ν^{-q}`.
    pub lhs_norm: f64,
    /// `∫ |g|^q ω^{-q}`.
    pub rhs_norm: f64,
    /// `lhs / rhs`, or 0 for the zero input.
    pub ratio: f64,
    pub zero_input: bool,
    pub q: f64,
}

/// `g_t = f_t + Σ_{s child} h_s - h_t` with `f_t = g χ_{Q_t}` and
/// `h_s = χ_{B_s} S_s / |B_s|`.
pub fn decompose(
    part: &TreePartition,
    g: &CellFunction,
    problem: &HardyProblem,
) -> Result<DecompositionResult, DecompError> {
    let tree = part.tree();
    if problem.tree() != tree {
        return Err(DecompError::Mismatch("the problem lives on a different tree".into()));
    }
    if g.values.len() != part.len() {
        return Err(DecompError::Mismatch(format!(
            "{} values for {} fragments",
            g.values.len(),
            part.len()
        )));
    }
    let total = g.integral(part);
    let l1 = g.l1(part);
    if total.abs() > MEAN_TOL * l1 {
        return Err(DecompError::NotMeanZero { integral: total, l1 });
    }
    let q = problem.q();
    let frag = part.fragments();

    let core: Vec<f64> = (0..tree.vertex_count())
        .map(|t| part.core(t).iter().map(|&c| g.values[c] * frag[c].volume).sum())
        .collect();
    let mut shadow = core.clone();
    for &t in tree.preorder().iter().rev() {
        if let Some(parent) = tree.parent(t) {
            shadow[parent] += shadow[t];
        }
    }
    let h: Vec<f64> = (0..tree.vertex_count())
        .map(|t| match part.slab(t) {
            Some(c) => shadow[t] / frag[c].volume,
            None => 0.0,
        })
        .collect();

    let parts: Vec<Part> = (0..tree.vertex_count())
        .into_par_iter()
        .map(|t| {
            let cells = part
                .enlarged(t)
                .into_iter()
                .map(|c| {
                    let mut v = if frag[c].owner == t { g.values[c] } else { 0.0 };
                    if let Some(&s) = tree
                        .children(t)
                        .iter()
                        .find(|&&s| part.slab(s) == Some(c))
                    {
                        v += h[s];
                    }
                    if part.slab(t) == Some(c) {
                        v -= h[t];
                    }
                    (c, v)
                })
                .collect();
            Part { vertex: t, cells }
        })
        .collect();

    let lhs_norm: f64 = parts
        .iter()
        .flat_map(|p| p.cells.iter())
        .map(|&(c, v)| frag[c].volume * (v.abs() / frag[c].nu).powf(q))
        .sum();
    let rhs_norm: f64 = g
        .values
        .iter()
        .zip(frag)
        .map(|(v, f)| f.volume * (v.abs() / f.omega).powf(q))
        .sum();
    let zero_input = rhs_norm == 0.0;
    let ratio = if zero_input { 0.0 } else { lhs_norm / rhs_norm };
    Ok(DecompositionResult {
        parts,
        shadow_integrals: shadow,
        lhs_norm,
        rhs_norm,
        ratio,
        zero_input,
        q,
    })
}

/// Constants entering the predicted bound
/// `C_pred = 2^{q-1} E^q + 2^q R^{q/p} A_ν^q A_ω^q C_H^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants {
    /// `sup ω/ν` (the embedding constant).
    pub embedding: f64,
    /// `sup_t ν_t / inf_{B_t} ν`.
    pub a_nu: f64,
    /// `sup_t sup_{Q_t} ω / ω_t`.
    pub a_omega: f64,
    /// `sup_t |U_t| / |B_t|`.
    pub volume_ratio: f64,
    /// Hardy constant used (an upper bound for the dual inequality).
    pub hardy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub sum_ok: bool,
    /// `max |Σ_t g_t - g|` over fragments, relative to `max |g|`.
    pub max_sum_error: f64,
    pub mean_zero_ok: bool,
    /// `max_t |∫ g_t|` relative to `‖g‖₁`.
    pub max_mean_error: f64,
    pub support_ok: bool,
    /// First vertex violating one of the three exact properties.
    pub offending: Option<usize>,
    pub lhs_norm: f64,
    pub rhs_norm: f64,
    pub ratio: f64,
    pub c_pred: f64,
    pub constants: BoundConstants,
    pub estimate_ok: bool,
}

impl DecompositionReport {
    pub fn ok(&self) -> bool {
        self.sum_ok && self.mean_zero_ok && self.support_ok && self.estimate_ok
    }
}

pub const SUM_TOL: f64 = 1e-12;
pub const PART_MEAN_TOL: f64 = 1e-10;

/// Checks the three properties of a 𝒞-decomposition and the weighted
/// estimate against the predicted constant. `hardy_bound` must bound the
/// Hardy constant of `problem` from above.
pub fn verify_decomposition(
    part: &TreePartition,
    g: &CellFunction,
    result: &DecompositionResult,
    problem: &HardyProblem,
    hardy_bound: f64,
) -> Result<DecompositionReport, DecompError> {
    let tree = part.tree();
    if result.parts.len() != tree.vertex_count() {
        return Err(DecompError::Mismatch("result does not cover every vertex".into()));
    }
    let frag = part.fragments();
    let mut offending = None;

    let mut support_ok = true;
    let mut sum = vec![0.0; part.len()];
    for (t, p) in result.parts.iter().enumerate() {
        let allowed = part.enlarged(t);
        for &(c, v) in &p.cells {
            sum[c] += v;
            if v != 0.0 && allowed.binary_search(&c).is_err() {
                support_ok = false;
                offending.get_or_insert(t);
            }
        }
    }
    let scale = g.max_abs();
    let max_sum_error = sum
        .iter()
        .zip(&g.values)
        .map(|(s, v)| (s - v).abs())
        .fold(0.0, f64::max)
        / if scale > 0.0 { scale } else { 1.0 };
    let sum_ok = max_sum_error <= SUM_TOL;
    if !sum_ok {
        let c = (0..part.len())
            .max_by(|&a, &b| (sum[a] - g.values[a]).abs().total_cmp(&(sum[b] - g.values[b]).abs()))
            .expect("nonempty");
        offending.get_or_insert(frag[c].owner);
    }

    let l1 = g.l1(part);
    let means: Vec<f64> = result.parts.iter().map(|p| p.integral(part).abs()).collect();
    let max_mean = means.iter().copied().fold(0.0, f64::max);
    let max_mean_error = if l1 > 0.0 { max_mean / l1 } else { max_mean };
    let mean_zero_ok = max_mean_error <= PART_MEAN_TOL;
    if !mean_zero_ok {
        let t = (0..means.len())
            .max_by(|&a, &b| means[a].total_cmp(&means[b]))
            .expect("nonempty");
        offending.get_or_insert(t);
    }

    let constants = bound_constants(part, problem, hardy_bound);
    let (p, q) = (problem.p(), problem.q());
    let c_pred = 2f64.powf(q - 1.0) * constants.embedding.powf(q)
        + 2f64.powf(q)
            * constants.volume_ratio.powf(q / p)
            * (constants.a_nu * constants.a_omega * constants.hardy).powf(q);
    let estimate_ok = result.lhs_norm <= c_pred * result.rhs_norm * (1.0 + 1e-12);
    Ok(DecompositionReport {
        sum_ok,
        max_sum_error,
        mean_zero_ok,
        max_mean_error,
        support_ok,
        offending,
        lhs_norm: result.lhs_norm,
        rhs_norm: result.rhs_norm,
        ratio: result.ratio,
        c_pred,
        constants,
        estimate_ok,
    })
}

/// Reads `ν_t`, `ω_t` back from `u_t = |B_t|^{1/p} ν_t`, `v_t = |B_t|^{1/p} ω_t`
/// and compares them with the fragment weights.
pub fn bound_constants(part: &TreePartition, problem: &HardyProblem, hardy_bound: f64) -> BoundConstants {
    let tree = part.tree();
    let frag = part.fragments();
    let p = problem.p();
    let embedding = frag.iter().map(|f| f.omega / f.nu).fold(0.0, f64::max);
    let mut a_nu = 1.0f64;
    let mut a_omega = 1.0f64;
    let mut volume_ratio = 0.0f64;
    for t in tree.star_vertices() {
        let c = part.slab(t).expect("non-root has a connector");
        let b = frag[c].volume;
        let scale = b.powf(1.0 / p);
        let nu_t = problem.u_at(t) / scale;
        let omega_t = problem.v_at(t) / scale;
        a_nu = a_nu.max(nu_t / frag[c].nu);
        for &k in part.core(t) {
            a_omega = a_omega.max(frag[k].omega / omega_t);
        }
        volume_ratio = volume_ratio.max(part.enlarged_volume(t) / b);
    }
    BoundConstants {
        embedding,
        a_nu,
        a_omega,
        volume_ratio,
        hardy: hardy_bound,
    }
}
