use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::{HardyError, HardyProblem};
use crate::tree::{Antichain, TreeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMethod {
    ClosedForm,
    DualNewton,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaK {
    pub alpha: f64,
    /// Minimizer on Γ* (star indexed), zero off the support of the paths.
    pub b: Vec<f64>,
    pub method: AlphaMethod,
    /// `max_t |Σ_{s∈𝒫_t} b_s/u_s − 1|`.
    pub kkt_residual: f64,
}

const KKT_TOL: f64 = 1e-8;

/// Path constraints restricted to the union of the boundary paths.
struct Constraints {
    /// Support vertices, increasing id.
    support: Vec<usize>,
    /// For each boundary vertex, the support columns on its path.
    rows: Vec<Vec<usize>>,
    inv_u: Vec<f64>,
}

impl Constraints {
    fn new(problem: &HardyProblem, boundary: &Antichain) -> Self {
        let tree = problem.tree();
        let mask = boundary.induced_subtree(tree);
        let support: Vec<usize> = tree.star_vertices().filter(|&v| mask[v]).collect();
        let mut col = vec![usize::MAX; tree.vertex_count()];
        for (i, &v) in support.iter().enumerate() {
            col[v] = i;
        }
        let rows = boundary
            .vertices()
            .iter()
            .map(|&t| {
                tree.path(t)
                    .expect("boundary lies in Γ*")
                    .into_iter()
                    .map(|s| col[s])
                    .collect()
            })
            .collect();
        let inv_u = support.iter().map(|&s| 1.0 / problem.u_at(s)).collect();
        Self {
            support,
            rows,
            inv_u,
        }
    }

    fn g_times(&self, b: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&c| b[c] * self.inv_u[c]).sum())
            .collect()
    }

    fn gt_times(&self, lambda: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.support.len()];
        for (r, &l) in self.rows.iter().zip(lambda) {
            for &c in r {
                y[c] += l * self.inv_u[c];
            }
        }
        y
    }

    /// `G diag(d) Gᵀ`.
    fn gram(&self, d: &[f64]) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut member = vec![vec![false; self.support.len()]; m];
        for (i, r) in self.rows.iter().enumerate() {
            for &c in r {
                member[i][c] = true;
            }
        }
        DMatrix::from_fn(m, m, |i, j| {
            self.rows[i]
                .iter()
                .filter(|&&c| member[j][c])
                .map(|&c| d[c] * self.inv_u[c] * self.inv_u[c])
                .sum()
        })
    }

    fn residual(&self, b: &[f64]) -> f64 {
        self.g_times(b)
            .iter()
            .map(|x| (x - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn p_norm(b: &[f64], p: f64) -> f64 {
    b.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `α_K = min{‖b‖_p : b ≥ 0, Σ_{s∈𝒫_t} b_s/u_s = 1 for t ∈ ∂K}`.
pub fn alpha_k(problem: &HardyProblem, boundary: &Antichain) -> Result<AlphaK, HardyError> {
    for &t in boundary.vertices() {
        if t >= problem.tree().vertex_count() {
            return Err(TreeError::InvalidVertex(t).into());
        }
    }
    let g = Constraints::new(problem, boundary);
    let p = problem.p();
    let (b_support, method) = match closed_form(&g, p) {
        Some(b) => (b, AlphaMethod::ClosedForm),
        None => (dual_newton(&g, p)?, AlphaMethod::DualNewton),
    };
    let kkt_residual = g.residual(&b_support);
    if kkt_residual > KKT_TOL {
        return Err(HardyError::AlphaSolver(kkt_residual));
    }
    let tree = problem.tree();
    let mut b = vec![0.0; tree.star_count()];
    for (i, &s) in g.support.iter().enumerate() {
        b[tree.star_index(s)] = b_support[i];
    }
    Ok(AlphaK {
        alpha: p_norm(&b_support, p),
        b,
        method,
        kkt_residual,
    })
}

/// `b = Gᵀ(GGᵀ)⁻¹𝟙` for `p = 2`, if it is (numerically) nonnegative.
fn closed_form(g: &Constraints, p: f64) -> Option<Vec<f64>> {
    if p != 2.0 {
        return None;
    }
    let gram = g.gram(&vec![1.0; g.support.len()]);
    let chol = gram.cholesky()?;
    let lambda = chol.solve(&DVector::from_element(g.rows.len(), 1.0));
    let b = g.gt_times(lambda.as_slice());
    if b.iter().any(|&x| x < -1e-12) {
        return None;
    }
    Some(b.into_iter().map(|x| x.max(0.0)).collect())
}

/// Maximizes the concave dual `D(λ) = Σλ − (p−1) Σ_s ((Gᵀλ)_s⁺/p)^q`,
/// whose maximizer gives `b_s = ((Gᵀλ)_s⁺/p)^{q−1}`, by damped Newton steps.
fn dual_newton(g: &Constraints, p: f64) -> Result<Vec<f64>, HardyError> {
    let q = p / (p - 1.0);
    let m = g.rows.len();
    let primal = |lambda: &[f64]| -> (Vec<f64>, Vec<f64>, f64) {
        let y = g.gt_times(lambda);
        let mut b = vec![0.0; y.len()];
        let mut db = vec![0.0; y.len()];
        let mut penalty = 0.0;
        for (i, &yi) in y.iter().enumerate() {
            if yi > 0.0 {
                let z = yi / p;
                b[i] = z.powf(q - 1.0);
                db[i] = (q - 1.0) / p * z.powf(q - 2.0);
                penalty += z.powf(q);
            }
        }
        let dual = lambda.iter().sum::<f64>() - (p - 1.0) * penalty;
        (b, db, dual)
    };

    // Start from a positive multiple of 𝟙 that roughly meets the constraints.
    let (b1, _, _) = primal(&vec![1.0; m]);
    let mean = g.g_times(&b1).iter().sum::<f64>() / m as f64;
    let mut lambda = vec![mean.powf(-1.0 / (q - 1.0)); m];
    let (mut b, mut db, mut dual) = primal(&lambda);

    for _ in 0..500 {
        let grad: Vec<f64> = g.g_times(&b).iter().map(|x| 1.0 - x).collect();
        let res = grad.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if res < 1e-13 {
            break;
        }
        // Jacobi-scaled, lightly damped Newton system: the diagonal of
        // G diag(b') Gᵀ can span many orders of magnitude across rows.
        let h = g.gram(&db);
        let scale: Vec<f64> = (0..m).map(|i| 1.0 / h[(i, i)].max(1e-300).sqrt()).collect();
        let mut damping = 1e-12;
        let step = loop {
            let hs = DMatrix::from_fn(m, m, |i, j| {
                h[(i, j)] * scale[i] * scale[j] + if i == j { damping } else { 0.0 }
            });
            if let Some(c) = hs.cholesky() {
                let rhs = DVector::from_fn(m, |i, _| grad[i] * scale[i]);
                let z = c.solve(&rhs);
                break DVector::from_fn(m, |i, _| z[i] * scale[i]);
            }
            damping *= 100.0;
        };
        let slope: f64 = grad.iter().zip(step.iter()).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..80 {
            let trial: Vec<f64> = lambda.iter().zip(step.iter()).map(|(l, s)| l + t * s).collect();
            // The optimum has every b_s > 0, so stay where Gᵀλ > 0 and the
            // dual is smooth and strictly concave.
            if g.gt_times(&trial).iter().any(|&y| y <= 0.0) {
                t *= 0.5;
                continue;
            }
            let (bt, dbt, dt) = primal(&trial);
            // Near the optimum dual increments drop below round-off; a
            // shrinking residual is then the better acceptance test.
            if dt >= dual + 1e-4 * t * slope || g.residual(&bt) < 0.5 * res {
                lambda = trial;
                b = bt;
                db = dbt;
                dual = dt;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let res = g.residual(&b);
    if res > KKT_TOL {
        return Err(HardyError::AlphaSolver(res));
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EhpB {
    pub b: f64,
    pub arg: Antichain,
    /// True when the antichain cap stopped enumeration: `b` is then a lower
    /// bound.
    pub partial: bool,
    pub evaluated: usize,
}

/// `‖v‖_p / α_K` for the subtree induced by `boundary`, with the norm taken
/// over the shadows of the boundary vertices. Off-path vertices of Γ*∖K get
/// no mass from a sequence supported on K, so they are excluded.
pub fn ehp_ratio(problem: &HardyProblem, boundary: &Antichain) -> Result<f64, HardyError> {
    let tree = problem.tree();
    let p = problem.p();
    let num = boundary
        .vertices()
        .iter()
        .flat_map(|&t| tree.subtree_preorder(t).iter())
        .map(|&s| problem.v_at(s).powf(p))
        .sum::<f64>()
        .powf(1.0 / p);
    Ok(num / alpha_k(problem, boundary)?.alpha)
}

const CHUNK: usize = 4096;

/// `B = sup_K ‖v‖_p / α_K` over all boundary antichains, up to `cap`.
pub fn ehp_b(problem: &HardyProblem, cap: usize) -> Result<EhpB, HardyError> {
    let better = |a: &(f64, Antichain), b: &(f64, Antichain)| b.0 > a.0 || (b.0 == a.0 && b.1 < a.1);
    let mut best: Option<(f64, Antichain)> = None;
    let mut partial = false;
    let mut evaluated = 0;
    let mut iter = problem.tree().boundary_antichains(cap);
    loop {
        let mut chunk = Vec::with_capacity(CHUNK);
        for item in iter.by_ref() {
            match item {
                Ok(a) => chunk.push(a),
                Err(TreeError::CapExceeded { .. }) => {
                    partial = true;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
            if chunk.len() == CHUNK {
                break;
            }
        }
        if chunk.is_empty() {
            break;
        }
        evaluated += chunk.len();
        let local = chunk
            .into_par_iter()
            .map(|a| ehp_ratio(problem, &a).map(|r| (r, a)))
            .try_reduce_with(|a, b| Ok(if better(&a, &b) { b } else { a }))
            .expect("chunk is nonempty")?;
        best = Some(match best {
            Some(cur) if !better(&cur, &local) => cur,
            _ => local,
        });
        if partial {
            break;
        }
    }
    let (b, arg) = best.expect("Γ* is nonempty, so some antichain exists");
    Ok(EhpB {
        b,
        arg,
        partial,
        evaluated,
    })
}
