use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::CoveringError;

/// Catalog of graph functions `φ` on `(-3ℓ/2, 3ℓ/2)^{n-1}`, all written as
/// `φ(x) = ℓ g(x/ℓ)` with `2 <= g < 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileKind {
    /// `g ≡ 2`.
    Flat,
    /// `g(x) = 2 + |x|_∞^α / 2`: a single Hölder-α cusp at the origin.
    Demo,
    /// `g(x) = 5/2 - |x|_∞ / 4`.
    Tent,
    /// `g(x) = 5/2 + c Σ_{k<terms} 2^{-αk} cos(2^k π x_i)`, averaged over
    /// coordinates, with `c = 0.4 (1 - 2^{-α})`.
    Weierstrass { terms: u32 },
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Flat => "flat",
            ProfileKind::Demo => "demo",
            ProfileKind::Tent => "tent",
            ProfileKind::Weierstrass { .. } => "weierstrass",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "flat" => Some(ProfileKind::Flat),
            "demo" => Some(ProfileKind::Demo),
            "tent" => Some(ProfileKind::Tent),
            "weierstrass" => Some(ProfileKind::Weierstrass { terms: 12 }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderProfile {
    pub kind: ProfileKind,
    pub alpha: f64,
    pub k_phi: f64,
    pub ell: f64,
    pub n: usize,
}

impl HolderProfile {
    /// Profile of the given kind; the Hölder constant is derived from the
    /// formula (flat and tent force `α = 1`).
    pub fn new(kind: ProfileKind, alpha: f64, ell: f64, n: usize) -> Result<Self, CoveringError> {
        if !(n == 2 || n == 3) {
            return Err(CoveringError::Dimension(n));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(CoveringError::InvalidProfile(format!("alpha = {alpha} not in (0, 1]")));
        }
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(CoveringError::InvalidProfile(format!("ell = {ell} must be positive")));
        }
        let (alpha, k_unit) = match kind {
            ProfileKind::Flat => (1.0, 0.0),
            ProfileKind::Tent => (1.0, 0.25),
            // | |x|_∞^α - |y|_∞^α | <= |x - y|_∞^α <= |x - y|^α
            ProfileKind::Demo => (alpha, 0.5),
            ProfileKind::Weierstrass { terms } => (alpha, weierstrass_constant(alpha, terms)),
        };
        Ok(Self {
            kind,
            alpha,
            // scaling x ↦ ℓ g(x/ℓ) multiplies the constant by ℓ^{1-α}
            k_phi: k_unit * ell.powf(1.0 - alpha),
            ell,
            n,
        })
    }

    pub fn demo(alpha: f64) -> Self {
        Self::new(ProfileKind::Demo, alpha, 1.0, 2).expect("valid demo profile")
    }

    pub fn flat() -> Self {
        Self::new(ProfileKind::Flat, 1.0, 1.0, 2).expect("valid flat profile")
    }

    /// Base dimension `n - 1`.
    pub fn base_dim(&self) -> usize {
        self.n - 1
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.base_dim());
        let l = self.ell;
        let g = match self.kind {
            ProfileKind::Flat => 2.0,
            ProfileKind::Demo => {
                let r = x.iter().fold(0.0f64, |a, v| a.max((v / l).abs()));
                2.0 + r.powf(self.alpha) / 2.0
            }
            ProfileKind::Tent => {
                let m = x.iter().fold(0.0f64, |a, v| a.max((v / l).abs()));
                2.5 - m / 4.0
            }
            ProfileKind::Weierstrass { terms } => {
                let c = 0.4 * (1.0 - 2f64.powf(-self.alpha));
                let mut s = 0.0;
                for v in x {
                    for k in 0..terms {
                        let f = 2f64.powi(k as i32);
                        s += f.powf(-self.alpha) * (f * PI * v / l).cos();
                    }
                }
                2.5 + c * s / x.len() as f64
            }
        };
        l * g
    }

    /// Checks `2ℓ <= φ < 3ℓ` and the sampled Hölder quotient on a grid with
    /// `m` points per axis; returns the largest observed quotient.
    pub fn validate(&self, m: usize) -> Result<f64, CoveringError> {
        let pts = self.grid(m);
        let vals: Vec<f64> = pts.iter().map(|x| self.phi(x)).collect();
        for (x, &v) in pts.iter().zip(&vals) {
            if !(v >= 2.0 * self.ell - 1e-12 * self.ell && v < 3.0 * self.ell) {
                return Err(CoveringError::InvalidProfile(format!(
                    "φ({x:?}) = {v} outside [2ℓ, 3ℓ)"
                )));
            }
        }
        let mut worst = 0.0f64;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = dist(&pts[i], &pts[j]);
                worst = worst.max((vals[i] - vals[j]).abs() / d.powf(self.alpha));
            }
        }
        if worst > self.k_phi * (1.0 + 1e-9) + 1e-12 {
            return Err(CoveringError::InvalidProfile(format!(
                "sampled Hölder quotient {worst} exceeds K_φ = {}",
                self.k_phi
            )));
        }
        Ok(worst)
    }

    fn grid(&self, m: usize) -> Vec<Vec<f64>> {
        let h = 1.5 * self.ell;
        let axis: Vec<f64> = (0..m)
            .map(|i| -h + 2.0 * h * (i as f64 + 0.5) / m as f64)
            .collect();
        match self.base_dim() {
            1 => axis.iter().map(|&a| vec![a]).collect(),
            _ => axis
                .iter()
                .flat_map(|&a| axis.iter().map(move |&b| vec![a, b]))
                .collect(),
        }
    }

    /// Decides whether `min φ` over the closed box `[lo, hi]` is at least
    /// `target`, refining cells until the Hölder modulus settles each one.
    pub fn min_at_least(&self, lo: &[f64], hi: &[f64], target: f64) -> Decision {
        let d = lo.len();
        // Absolute slack for round-off in φ and in the modulus.
        let slack = 1e-12 * self.ell;
        let mut stack = vec![(lo.to_vec(), hi.to_vec(), 0u32)];
        let mut evaluations = 0usize;
        let mut unresolved = false;
        while let Some((a, b, depth)) = stack.pop() {
            let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let f = self.phi(&c);
            evaluations += 1;
            if f < target - slack {
                return Decision::No;
            }
            let r = 0.5 * dist(&a, &b);
            if f - self.k_phi * r.powf(self.alpha) >= target - slack {
                continue;
            }
            if depth >= MAX_REFINE || evaluations > MAX_EVALUATIONS {
                unresolved = true;
                continue;
            }
            for mask in 0..(1usize << d) {
                let mut na = a.clone();
                let mut nb = b.clone();
                for k in 0..d {
                    if mask >> k & 1 == 0 {
                        nb[k] = c[k];
                    } else {
                        na[k] = c[k];
                    }
                }
                stack.push((na, nb, depth + 1));
            }
        }
        if unresolved {
            Decision::Inconclusive
        } else {
            Decision::Yes
        }
    }

    /// Euclidean distance from `y = (y', y_n)` to the graph `G`, by a grid
    /// search over the base followed by local refinement.
    pub fn distance_to_graph(&self, y: &[f64]) -> f64 {
        let d = self.base_dim();
        let (yb, yn) = (&y[..d], y[d]);
        let h = 1.5 * self.ell;
        let eval = |x: &[f64]| {
            let v = self.phi(x) - yn;
            (dist(x, yb).powi(2) + v * v).sqrt()
        };
        let mut best = eval(yb);
        let mut center = yb.to_vec();
        let mut radius = best.min(3.0 * self.ell);
        let m = if d == 1 { 64 } else { 16 };
        for _ in 0..40 {
            let step = 2.0 * radius / m as f64;
            let mut improved_center = center.clone();
            let offsets: Vec<Vec<f64>> = match d {
                1 => (0..=m).map(|i| vec![-radius + step * i as f64]).collect(),
                _ => (0..=m)
                    .flat_map(|i| (0..=m).map(move |j| (i, j)))
                    .map(|(i, j)| vec![-radius + step * i as f64, -radius + step * j as f64])
                    .collect(),
            };
            for o in offsets {
                let x: Vec<f64> = center
                    .iter()
                    .zip(&o)
                    .map(|(c, o)| (c + o).clamp(-h, h))
                    .collect();
                let e = eval(&x);
                if e < best {
                    best = e;
                    improved_center = x;
                }
            }
            center = improved_center;
            radius = 2.0 * step;
            if radius < 1e-9 * self.ell {
                break;
            }
        }
        best
    }
}

const MAX_REFINE: u32 = 48;
const MAX_EVALUATIONS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Yes,
    No,
    Inconclusive,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Hölder-α constant (unit scale) of the truncated lacunary cosine sum, valid
/// on any pair of points at distance at most 3.
fn weierstrass_constant(alpha: f64, terms: u32) -> f64 {
    let c = 0.4 * (1.0 - 2f64.powf(-alpha));
    // Lipschitz bound of the finite sum, converted to Hölder-α on diameter 3.
    let lip: f64 = (0..terms).map(|k| PI * 2f64.powf(k as f64 * (1.0 - alpha))).sum();
    let via_lip = lip * 3f64.powf(1.0 - alpha);
    if alpha < 1.0 {
        // split the series at 2^{-N} ~ |x - y|
        let series = PI / (2f64.powf(1.0 - alpha) - 1.0) + 2f64.powf(1.0 + alpha) / (1.0 - 2f64.powf(-alpha));
        c * series.min(via_lip)
    } else {
        c * via_lip
    }
}
