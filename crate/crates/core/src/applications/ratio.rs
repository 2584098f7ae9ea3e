use std::f64::consts::PI;
use std::fmt::Write;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::functions::TestFunction;
use super::ApplicationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    ImprovedPoincare,
    FractionalPoincare,
    Korn,
}

impl InequalityKind {
    pub fn name(&self) -> &'static str {
        match self {
            InequalityKind::ImprovedPoincare => "improved_poincare",
            InequalityKind::FractionalPoincare => "fractional_poincare",
            InequalityKind::Korn => "korn",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "improved_poincare" | "poincare" => Some(InequalityKind::ImprovedPoincare),
            "fractional_poincare" | "fractional" => Some(InequalityKind::FractionalPoincare),
            "korn" => Some(InequalityKind::Korn),
            _ => None,
        }
    }

    /// Exponent shift between the two sides: `α` for the improved Poincaré
    /// inequality, `1 - α` for the fractional one (added to `s + β`) and
    /// `α - 1` for Korn.
    pub fn default_shift(&self, alpha: f64) -> f64 {
        match self {
            InequalityKind::ImprovedPoincare => alpha,
            InequalityKind::FractionalPoincare => 1.0 - alpha,
            InequalityKind::Korn => alpha - 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityParams {
    pub kind: InequalityKind,
    pub beta: f64,
    pub p: f64,
    /// Right-hand weight is `d^{(β + shift) p}` (`d^{(s + β + shift) p}` for
    /// the fractional form); `None` takes the kind's default.
    pub shift: Option<f64>,
    pub s: f64,
    pub tau: f64,
    pub samples: usize,
    pub seed: u64,
}

impl InequalityParams {
    pub fn new(kind: InequalityKind, beta: f64, p: f64, samples: usize, seed: u64) -> Self {
        Self {
            kind,
            beta,
            p,
            shift: None,
            s: 0.5,
            tau: 0.5,
            samples,
            seed,
        }
    }

    fn validate(&self) -> Result<(), ApplicationError> {
        let bad = |m: String| Err(ApplicationError::InvalidParameter(m));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p = {} must lie in (1, ∞)", self.p));
        }
        if !self.beta.is_finite() {
            return bad("beta must be finite".into());
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if self.kind == InequalityKind::FractionalPoincare
            && !(self.s > 0.0 && self.s < 1.0 && self.tau > 0.0 && self.tau < 1.0)
        {
            return bad(format!("s = {} and tau = {} must lie in (0, 1)", self.s, self.tau));
        }
        Ok(())
    }
}

/// Above this two-run spread a report is marked low confidence.
pub const LOW_CONFIDENCE_SPREAD: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub kind: InequalityKind,
    pub function: String,
    pub beta: f64,
    pub p: f64,
    pub shift: f64,
    pub s: Option<f64>,
    pub tau: Option<f64>,
    pub sample_count: usize,
    pub seeds: [u64; 2],
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Ratio from the second, independent sample set.
    pub ratio_second: f64,
    /// `|ratio - ratio_second| / max`.
    pub spread: f64,
    pub low_confidence: bool,
    /// `rhs = 0` while `lhs > 0`.
    pub violating_candidate: bool,
}

struct Sides {
    lhs: f64,
    rhs: f64,
    nodes: usize,
}

/// Quadrature node: weight, distance surrogate and the evaluated quantity.
struct Node {
    w: f64,
    d: f64,
    data: Vec<f64>,
}

fn open01(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(Open01)
}

/// Stratified nodes, one ChaCha stream per stratum so the result does not
/// depend on the number of workers.
fn nodes(
    domain: &Domain,
    samples: usize,
    seed: u64,
    eval: impl Fn(&[f64], f64, &mut ChaCha8Rng) -> Vec<f64> + Sync,
) -> Vec<Node> {
    let strata = domain.strata();
    let total = domain.volume();
    strata
        .par_iter()
        .enumerate()
        .map(|(k, st)| {
            let count = ((samples as f64 * st.volume / total).round() as usize).max(1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let w = st.volume / count as f64;
            (0..count)
                .map(|_| {
                    let x: Vec<f64> = st.lo.iter().map(|l| l + st.edge * open01(&mut rng)).collect();
                    let d = domain.distance_in(k, &x);
                    let data = eval(&x, d, &mut rng);
                    Node { w, d, data }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension checked by the caller"),
    }
}

fn direction(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match n {
        1 => vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }],
        2 => {
            let a = 2.0 * PI * rng.gen::<f64>();
            vec![a.cos(), a.sin()]
        }
        _ => {
            let z = 2.0 * rng.gen::<f64>() - 1.0;
            let a = 2.0 * PI * rng.gen::<f64>();
            let r = (1.0 - z * z).max(0.0).sqrt();
            vec![r * a.cos(), r * a.sin(), z]
        }
    }
}

/// Weighted mean removal: `c = Σ w f d^{βp} / Σ w d^{βp}` per component.
fn weighted_mean(nodes: &[Node], bp: f64, component: impl Fn(&Node) -> Vec<f64>) -> Vec<f64> {
    let mut den = 0.0;
    let mut num: Vec<f64> = Vec::new();
    for nd in nodes {
        let wt = nd.w * nd.d.powf(bp);
        let c = component(nd);
        if num.is_empty() {
            num = vec![0.0; c.len()];
        }
        den += wt;
        for (a, v) in num.iter_mut().zip(c) {
            *a += wt * v;
        }
    }
    num.iter().map(|a| a / den).collect()
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn sides(
    domain: &Domain,
    f: &TestFunction,
    prm: &InequalityParams,
    shift: f64,
    seed: u64,
) -> Sides {
    let n = domain.dim();
    let p = prm.p;
    let bp = prm.beta * p;
    match prm.kind {
        InequalityKind::ImprovedPoincare => {
            let nd = nodes(domain, prm.samples, seed, |x, _, _| {
                let g = f.gradient(x);
                vec![f.value(x), g.iter().map(|v| v * v).sum::<f64>().sqrt()]
            });
            let c = weighted_mean(&nd, bp, |q| vec![q.data[0]])[0];
            let mut lhs = 0.0;
            let mut raw = 0.0;
            let mut rhs = 0.0;
            for q in &nd {
                lhs += q.w * (q.data[0] - c).abs().powf(p) * q.d.powf(bp);
                raw += q.w * q.data[0].abs().powf(p) * q.d.powf(bp);
                rhs += q.w * q.data[1].powf(p) * q.d.powf((prm.beta + shift) * p);
            }
            finish(lhs, raw, rhs, p, nd.len())
        }
        InequalityKind::Korn => {
            let nd = nodes(domain, prm.samples, seed, |x, _, _| {
                f.jacobian(x).into_iter().flatten().collect()
            });
            let eta = weighted_mean(&nd, bp, |q| antisymmetric(&q.data, n));
            let mut lhs = 0.0;
            let mut raw = 0.0;
            let mut rhs = 0.0;
            for q in &nd {
                let du: Vec<f64> = q.data.iter().zip(&eta).map(|(a, e)| a - e).collect();
                let eps = symmetric(&q.data, n);
                lhs += q.w * frobenius(&du).powf(p) * q.d.powf(bp);
                raw += q.w * frobenius(&q.data).powf(p) * q.d.powf(bp);
                rhs += q.w * frobenius(&eps).powf(p) * q.d.powf((prm.beta + shift) * p);
            }
            finish(lhs, raw, rhs, p, nd.len())
        }
        InequalityKind::FractionalPoincare => {
            // radial density ∝ r^{k-1} on (0, R) with k = p(1 - s) cancels the
            // kernel singularity against the difference quotient
            let k = p * (1.0 - prm.s);
            let expo = (prm.s + prm.beta + shift) * p;
            let area = sphere_area(n);
            let nd = nodes(domain, prm.samples, seed, |x, d, rng| {
                let fx = f.value(x);
                let big_r = prm.tau * d;
                let r = big_r * open01(rng).powf(1.0 / k);
                let dir = direction(n, rng);
                let y: Vec<f64> = x.iter().zip(&dir).map(|(a, u)| a + r * u).collect();
                let inner = match domain.distance(&y) {
                    Some(dy) => {
                        let delta = d.min(dy);
                        ((fx - f.value(&y)).abs() / r).powf(p) * delta.powf(expo) * area * big_r.powf(k) / k
                    }
                    None => 0.0,
                };
                vec![fx, inner]
            });
            let c = weighted_mean(&nd, bp, |q| vec![q.data[0]])[0];
            let mut lhs = 0.0;
            let mut raw = 0.0;
            let mut rhs = 0.0;
            for q in &nd {
                lhs += q.w * (q.data[0] - c).abs().powf(p) * q.d.powf(bp);
                raw += q.w * q.data[0].abs().powf(p) * q.d.powf(bp);
                rhs += q.w * q.data[1];
            }
            finish(lhs, raw, rhs, p, nd.len())
        }
    }
}

/// p-th roots; a left side that is round-off next to the unprojected norm is
/// zero.
fn finish(lhs: f64, raw: f64, rhs: f64, p: f64, nodes: usize) -> Sides {
    let (lhs, raw, rhs) = (lhs.powf(1.0 / p), raw.powf(1.0 / p), rhs.powf(1.0 / p));
    Sides {
        lhs: if lhs <= 1e-10 * raw { 0.0 } else { lhs },
        rhs,
        nodes,
    }
}

fn antisymmetric(m: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = 0.5 * (m[i * n + j] - m[j * n + i]);
        }
    }
    out
}

fn symmetric(m: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = 0.5 * (m[i * n + j] + m[j * n + i]);
        }
    }
    out
}

fn ratio_of(s: &Sides) -> f64 {
    if s.rhs > 0.0 {
        s.lhs / s.rhs
    } else if s.lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Measures `lhs / rhs` of one inequality for one function, on two
/// independent sample sets (seeds `seed` and `seed + 1`).
pub fn inequality_ratio(
    domain: &Domain,
    f: &TestFunction,
    prm: &InequalityParams,
) -> Result<RatioReport, ApplicationError> {
    prm.validate()?;
    let n = domain.dim();
    if !(1..=3).contains(&n) {
        return Err(ApplicationError::InvalidParameter(format!("dimension {n} not supported")));
    }
    f.validate(n)?;
    if prm.kind == InequalityKind::Korn && !f.is_field() && n > 1 {
        return Err(ApplicationError::InvalidFunction(format!(
            "Korn needs a vector field, got {}",
            f.name()
        )));
    }
    let shift = prm.shift.unwrap_or_else(|| prm.kind.default_shift(domain.alpha()));
    let seeds = [prm.seed, prm.seed.wrapping_add(1)];
    let a = sides(domain, f, prm, shift, seeds[0]);
    let b = sides(domain, f, prm, shift, seeds[1]);
    let (ratio, ratio_second) = (ratio_of(&a), ratio_of(&b));
    let top = ratio.max(ratio_second);
    let spread = if top > 0.0 && top.is_finite() {
        (ratio - ratio_second).abs() / top
    } else {
        0.0
    };
    let fractional = prm.kind == InequalityKind::FractionalPoincare;
    Ok(RatioReport {
        kind: prm.kind,
        function: f.name().to_string(),
        beta: prm.beta,
        p: prm.p,
        shift,
        s: fractional.then_some(prm.s),
        tau: fractional.then_some(prm.tau),
        sample_count: a.nodes,
        seeds,
        lhs: a.lhs,
        rhs: a.rhs,
        ratio,
        ratio_second,
        spread,
        low_confidence: spread > LOW_CONFIDENCE_SPREAD,
        violating_candidate: a.rhs == 0.0 && a.lhs > 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    /// `-α/p`.
    pub threshold: f64,
    pub rows: Vec<RatioReport>,
    /// Ratios increase as β decreases over the rows at or below the
    /// threshold (false when there are fewer than two such rows).
    pub growing_below: bool,
    /// Largest ratio over the rows strictly above the threshold.
    pub max_above: Option<f64>,
}

/// One report per `β` in `betas` (kept in the given order).
pub fn parameter_sweep(
    domain: &Domain,
    f: &TestFunction,
    base: &InequalityParams,
    betas: &[f64],
) -> Result<SweepTable, ApplicationError> {
    let threshold = -domain.alpha() / base.p;
    let rows = betas
        .iter()
        .map(|&beta| inequality_ratio(domain, f, &InequalityParams { beta, ..*base }))
        .collect::<Result<Vec<_>, _>>()?;
    let mut below: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.beta <= threshold)
        .map(|r| (r.beta, r.ratio))
        .collect();
    below.sort_by(|a, b| b.0.total_cmp(&a.0));
    let growing_below = below.len() >= 2 && below.windows(2).all(|w| w[1].1 > w[0].1);
    let max_above = rows
        .iter()
        .filter(|r| r.beta > threshold)
        .map(|r| r.ratio)
        .reduce(f64::max);
    Ok(SweepTable {
        threshold,
        rows,
        growing_below,
        max_above,
    })
}

/// Plot-ready sweep table.
pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("beta,lhs,rhs,ratio,ratio_second,spread,low_confidence,above_threshold\n");
    for r in &table.rows {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{},{}",
            r.beta,
            r.lhs,
            r.rhs,
            r.ratio,
            r.ratio_second,
            r.spread,
            r.low_confidence,
            r.beta > table.threshold
        )
        .expect("writing to a string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Domain {
        Domain::UnitCube { n: 2 }
    }

    fn linear() -> TestFunction {
        TestFunction::Linear {
            coeffs: vec![1.0, 0.0],
            offset: -0.5,
        }
    }

    #[test]
    fn constant_has_zero_ratio() {
        let prm = InequalityParams::new(InequalityKind::ImprovedPoincare, 0.0, 2.0, 2000, 1);
        let r = inequality_ratio(&square(), &TestFunction::Constant { c: 3.0 }, &prm).unwrap();
        assert_eq!((r.lhs, r.ratio), (0.0, 0.0));
        assert!(!r.violating_candidate);
    }

    #[test]
    fn rotation_is_in_the_kernel() {
        let prm = InequalityParams::new(InequalityKind::Korn, 0.0, 2.0, 2000, 1);
        let r = inequality_ratio(&square(), &TestFunction::Rotation, &prm).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, 0.0));
        assert!(!r.violating_candidate);
    }

    #[test]
    fn unweighted_linear_on_square() {
        let mut prm = InequalityParams::new(InequalityKind::ImprovedPoincare, 0.0, 2.0, 100_000, 7);
        prm.shift = Some(0.0);
        let r = inequality_ratio(&square(), &linear(), &prm).unwrap();
        assert!((r.ratio - (1.0f64 / 12.0).sqrt()).abs() < 0.01 * r.ratio, "{r:?}");
        assert!(r.spread < 0.01);
    }

    #[test]
    fn scaling_invariance() {
        let prm = InequalityParams::new(InequalityKind::ImprovedPoincare, 0.2, 3.0, 5000, 3);
        let f = TestFunction::Sine { axis: 1, freq: 2.0 };
        let g = TestFunction::Sine { axis: 1, freq: 2.0 };
        let a = inequality_ratio(&square(), &f, &prm).unwrap();
        let b = inequality_ratio(&square(), &g, &prm).unwrap();
        assert_eq!(a, b);
        let lf = TestFunction::Linear {
            coeffs: vec![-7.0, 0.0],
            offset: 3.5,
        };
        let s = inequality_ratio(&square(), &lf, &prm).unwrap();
        let t = inequality_ratio(&square(), &linear(), &prm).unwrap();
        assert!((s.ratio - t.ratio).abs() <= 1e-12 * t.ratio);
    }

    #[test]
    fn seeds_reproduce() {
        let prm = InequalityParams::new(InequalityKind::FractionalPoincare, 0.0, 2.0, 4000, 5);
        let a = inequality_ratio(&square(), &linear(), &prm).unwrap();
        let b = inequality_ratio(&square(), &linear(), &prm).unwrap();
        assert_eq!(a, b);
        assert!(a.ratio.is_finite() && a.ratio > 0.0);
    }

    #[test]
    fn invalid_parameters() {
        let mut prm = InequalityParams::new(InequalityKind::FractionalPoincare, 0.0, 2.0, 10, 5);
        prm.s = 1.5;
        assert!(inequality_ratio(&square(), &linear(), &prm).is_err());
        let prm = InequalityParams::new(InequalityKind::Korn, 0.0, 2.0, 10, 5);
        assert!(inequality_ratio(&square(), &linear(), &prm).is_err());
    }

    #[test]
    fn empty_sweep() {
        let prm = InequalityParams::new(InequalityKind::ImprovedPoincare, 0.0, 2.0, 10, 5);
        let t = parameter_sweep(&square(), &linear(), &prm, &[]).unwrap();
        assert!(t.rows.is_empty());
        assert!(!t.growing_below);
        assert_eq!(t.max_above, None);
    }
}
