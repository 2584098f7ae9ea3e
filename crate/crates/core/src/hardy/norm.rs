use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HardyError, HardyProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `‖M‖` on ℓ^p.
    Primal,
    /// `‖Mᵀ‖` on ℓ^q.
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub random_starts: usize,
    pub seed: u64,
    pub dense_cap: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            random_starts: 8,
            seed: 0x5eed,
            dense_cap: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactConstant {
    /// Best certified lower bound (`‖Ax‖/‖x‖` at the returned maximizer).
    pub value: f64,
    pub lower: f64,
    /// Collatz-Wielandt upper bound.
    pub upper: f64,
    /// Normalized nonnegative maximizer `x` (star indexed). In primal form
    /// the Hardy sequence is `d_t = x_t / u_t`.
    pub maximizer: Vec<f64>,
    pub iterations: usize,
    pub form: Form,
}

impl ExactConstant {
    pub fn relative_gap(&self) -> f64 {
        (self.upper - self.lower) / self.lower
    }
}

/// One subtree hanging from a child of the root, in local pre-order.
struct Block {
    parent: Vec<usize>,
    inv_u: Vec<f64>,
    v: Vec<f64>,
    global: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl Block {
    fn new(problem: &HardyProblem, top: usize) -> Self {
        let tree = problem.tree();
        let verts = tree.subtree_preorder(top);
        let mut local = std::collections::HashMap::with_capacity(verts.len());
        for (i, &t) in verts.iter().enumerate() {
            local.insert(t, i);
        }
        let parent = verts
            .iter()
            .map(|&t| match tree.parent(t) {
                Some(p) if t != top => local[&p],
                _ => NONE,
            })
            .collect();
        Self {
            parent,
            inv_u: verts.iter().map(|&t| 1.0 / problem.u_at(t)).collect(),
            v: verts.iter().map(|&t| problem.v_at(t)).collect(),
            global: verts.iter().map(|&t| tree.star_index(t)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.v.len()
    }

    /// `(Mx)_s = v_s Σ_{t⪯s} x_t / u_t`.
    fn m(&self, x: &[f64], out: &mut [f64]) {
        let mut acc = vec![0.0; x.len()];
        for i in 0..x.len() {
            let up = if self.parent[i] == NONE { 0.0 } else { acc[self.parent[i]] };
            acc[i] = up + x[i] * self.inv_u[i];
            out[i] = self.v[i] * acc[i];
        }
    }

    /// `(Mᵀy)_t = u_t^{-1} Σ_{s⪰t} v_s y_s`.
    fn mt(&self, y: &[f64], out: &mut [f64]) {
        let mut acc: Vec<f64> = y.iter().zip(&self.v).map(|(a, b)| a * b).collect();
        for i in (0..y.len()).rev() {
            if self.parent[i] != NONE {
                acc[self.parent[i]] += acc[i];
            }
        }
        for i in 0..y.len() {
            out[i] = acc[i] * self.inv_u[i];
        }
    }

    fn apply(&self, form: Form, x: &[f64], out: &mut [f64]) {
        match form {
            Form::Primal => self.m(x, out),
            Form::Dual => self.mt(x, out),
        }
    }

    fn apply_adjoint(&self, form: Form, x: &[f64], out: &mut [f64]) {
        match form {
            Form::Primal => self.mt(x, out),
            Form::Dual => self.m(x, out),
        }
    }
}

fn norm_r(x: &[f64], r: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|&b| (b.abs() / m).powf(r)).sum::<f64>().powf(1.0 / r)
}

struct Run {
    lower: f64,
    upper: f64,
    x: Vec<f64>,
    iterations: usize,
}

/// Iterates `x ← Φ_{r'}(Aᵀ Φ_r(A x))` from a positive start. Each step
/// yields the lower bound `‖Ax‖_r` (with `‖x‖_r = 1`) and the upper bound
/// `(max_i F(x)_i / x_i)^{1/r'}`, valid because `F` is order preserving and
/// homogeneous of degree one.
fn power_iteration(block: &Block, form: Form, r: f64, start: Vec<f64>, opts: &NormOptions) -> Run {
    let rs = r / (r - 1.0);
    let n = block.len();
    let mut x = start;
    let nx = norm_r(&x, r);
    x.iter_mut().for_each(|a| *a /= nx);
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut best = Run {
        lower: 0.0,
        upper: f64::INFINITY,
        x: x.clone(),
        iterations: 0,
    };
    for it in 1..=opts.max_iter {
        block.apply(form, &x, &mut y);
        let lower = norm_r(&y, r);
        if lower > best.lower {
            best.lower = lower;
            best.x.copy_from_slice(&x);
        }
        y.iter_mut().for_each(|a| *a = a.powf(r - 1.0));
        block.apply_adjoint(form, &y, &mut z);
        let mut mu = 0.0f64;
        for i in 0..n {
            z[i] = z[i].powf(rs - 1.0);
            mu = mu.max(z[i] / x[i]);
        }
        best.upper = best.upper.min(mu.powf(1.0 / rs));
        best.iterations = it;
        if best.upper <= best.lower * (1.0 + opts.tol) {
            break;
        }
        let nz = norm_r(&z, r);
        for i in 0..n {
            x[i] = z[i] / nz;
        }
    }
    best.upper = best.upper.max(best.lower);
    best
}

/// Best constant of the Hardy inequality, i.e. the ℓ^p norm of `M` (primal)
/// or the ℓ^q norm of `Mᵀ` (dual), certified by a two-sided bound.
pub fn exact_constant(
    problem: &HardyProblem,
    form: Form,
    opts: &NormOptions,
) -> Result<ExactConstant, HardyError> {
    let tree = problem.tree();
    let n = tree.star_count();
    if n > opts.dense_cap {
        return Err(HardyError::TooLarge {
            n,
            cap: opts.dense_cap,
        });
    }
    let r = match form {
        Form::Primal => problem.p(),
        Form::Dual => problem.q(),
    };
    // M is block diagonal over the subtrees of the root's children.
    let runs: Vec<(usize, Run)> = tree
        .children(tree.root())
        .par_iter()
        .map(|&top| {
            let block = Block::new(problem, top);
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(top as u64);
            let mut starts = vec![vec![1.0; block.len()]];
            for _ in 0..opts.random_starts {
                starts.push((0..block.len()).map(|_| rng.gen_range(0.05..1.0)).collect());
            }
            let mut acc: Option<Run> = None;
            let mut iters = 0;
            for s in starts {
                let run = power_iteration(&block, form, r, s, opts);
                iters += run.iterations;
                acc = Some(match acc {
                    None => run,
                    Some(mut a) => {
                        a.upper = a.upper.min(run.upper);
                        if run.lower > a.lower {
                            a.lower = run.lower;
                            a.x = run.x;
                        }
                        a
                    }
                });
            }
            let mut run = acc.expect("at least one start");
            run.iterations = iters;
            let mut x = vec![0.0; n];
            for (i, &g) in block.global.iter().enumerate() {
                x[g] = run.x[i];
            }
            run.x = x;
            (top, run)
        })
        .collect();

    let iterations = runs.iter().map(|(_, r)| r.iterations).sum();
    let upper = runs.iter().map(|(_, r)| r.upper).fold(0.0, f64::max);
    let (_, best) = runs
        .into_iter()
        .reduce(|a, b| if b.1.lower > a.1.lower { b } else { a })
        .expect("root has a child");
    if upper > best.lower * (1.0 + opts.tol) {
        return Err(HardyError::NonConvergence {
            best: best.lower,
            iterations,
        });
    }
    Ok(ExactConstant {
        value: best.lower,
        lower: best.lower,
        upper,
        maximizer: best.x,
        iterations,
        form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::RootedTree;

    fn c(problem: &HardyProblem, form: Form) -> f64 {
        exact_constant(problem, form, &NormOptions::default())
            .unwrap()
            .value
    }

    #[test]
    fn one_by_one() {
        for p in [1.5, 2.0, 3.0, 7.0] {
            let pr = HardyProblem::new(RootedTree::chain(1), vec![2.0], vec![3.0], p).unwrap();
            assert!((c(&pr, Form::Primal) - 1.5).abs() < 1e-12);
            assert!((c(&pr, Form::Dual) - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn two_chain_golden_ratio() {
        let pr = HardyProblem::unit(RootedTree::chain(2), 2.0).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let r = exact_constant(&pr, Form::Primal, &NormOptions::default()).unwrap();
        assert!((r.value - golden).abs() < 1e-10);
        assert!(r.relative_gap() <= 1e-10);
        assert!((c(&pr, Form::Dual) - golden).abs() < 1e-10);
    }

    #[test]
    fn star_is_identity() {
        let pr = HardyProblem::unit(RootedTree::star(2), 2.0).unwrap();
        assert!((c(&pr, Form::Primal) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximizer_attains_value() {
        let tree = RootedTree::with_root(0, &[(1, 0), (2, 1), (3, 1), (4, 3)]).unwrap();
        let pr =
            HardyProblem::new(tree, vec![1.0, 0.5, 2.0, 1.5], vec![0.7, 1.2, 0.4, 2.0], 3.0).unwrap();
        let r = exact_constant(&pr, Form::Primal, &NormOptions::default()).unwrap();
        // Evaluate the Hardy quotient directly with d_t = x_t / u_t.
        let t = pr.tree();
        let d: Vec<f64> = t
            .star_vertices()
            .map(|s| r.maximizer[t.star_index(s)] / pr.u_at(s))
            .collect();
        let lhs: f64 = t
            .star_vertices()
            .map(|s| {
                let sum: f64 = t.path(s).unwrap().iter().map(|&r| d[t.star_index(r)]).sum();
                (pr.v_at(s) * sum).powf(3.0)
            })
            .sum::<f64>()
            .powf(1.0 / 3.0);
        let rhs: f64 = t
            .star_vertices()
            .map(|s| (d[t.star_index(s)] * pr.u_at(s)).powf(3.0))
            .sum::<f64>()
            .powf(1.0 / 3.0);
        assert!((lhs / rhs - r.value).abs() < 1e-12 * r.value);
    }

    #[test]
    fn dense_cap() {
        let pr = HardyProblem::unit(RootedTree::chain(10), 2.0).unwrap();
        let opts = NormOptions {
            dense_cap: 5,
            ..NormOptions::default()
        };
        assert!(matches!(
            exact_constant(&pr, Form::Primal, &opts),
            Err(HardyError::TooLarge { n: 10, cap: 5 })
        ));
    }

    #[test]
    fn non_convergence_reports_best() {
        let pr = HardyProblem::unit(RootedTree::chain(30), 1.5).unwrap();
        let opts = NormOptions {
            max_iter: 2,
            random_starts: 0,
            ..NormOptions::default()
        };
        match exact_constant(&pr, Form::Primal, &opts) {
            Err(HardyError::NonConvergence { best, iterations }) => {
                assert!(best > 0.0);
                assert_eq!(iterations, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
