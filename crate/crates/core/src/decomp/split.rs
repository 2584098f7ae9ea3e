use std::ops::{Add, Div, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::DecompError;

/// Field arithmetic for the splitting primitive: exact for rationals, with a
/// relative tolerance for floats.
pub trait Scalar:
    Clone
    + PartialOrd
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn magnitude(&self) -> Self;
    /// Whether `x` counts as zero next to a quantity of size `scale`.
    fn negligible(x: &Self, scale: &Self) -> bool;
}

impl Scalar for f64 {
    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn negligible(x: &Self, scale: &Self) -> bool {
        x.abs() <= 1e-12 * scale
    }
}

impl<T: Clone + Integer + Signed> Scalar for Ratio<T> {
    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn negligible(x: &Self, _scale: &Self) -> bool {
        x.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitPair<T> {
    pub f_a: Vec<T>,
    pub f_b: Vec<T>,
}

/// Identity checks for a split; exact for rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitCheck {
    pub support_a: bool,
    pub support_b: bool,
    pub mean_a: bool,
    pub mean_b: bool,
    pub sum: bool,
}

impl SplitCheck {
    pub fn all(&self) -> bool {
        self.support_a && self.support_b && self.mean_a && self.mean_b && self.sum
    }
}

fn dot<T: Scalar>(values: &[T], volumes: &[T], mask: impl Fn(usize) -> bool) -> T {
    values
        .iter()
        .zip(volumes)
        .enumerate()
        .filter(|&(i, _)| mask(i))
        .fold(T::zero(), |acc, (_, (v, w))| acc + v.clone() * w.clone())
}

fn l1<T: Scalar>(values: &[T], volumes: &[T]) -> T {
    values
        .iter()
        .zip(volumes)
        .fold(T::zero(), |acc, (v, w)| acc + v.magnitude() * w.clone())
}

/// Splits `f` (supported in `A ∪ B`, zero mean) into
/// `f_A = χ_A f - χ_{A∩B} ∫_A f / |A∩B|` and
/// `f_B = χ_{B∖A} f + χ_{A∩B} ∫_A f / |A∩B|`.
pub fn split_pair<T: Scalar>(
    volumes: &[T],
    f: &[T],
    a: &[bool],
    b: &[bool],
) -> Result<SplitPair<T>, DecompError> {
    let n = volumes.len();
    if f.len() != n || a.len() != n || b.len() != n {
        return Err(DecompError::Mismatch("cell arrays differ in length".into()));
    }
    if volumes.iter().any(|v| !(*v > T::zero())) {
        return Err(DecompError::InvalidPartition("non-positive cell volume".into()));
    }
    let overlap = (0..n)
        .filter(|&i| a[i] && b[i])
        .fold(T::zero(), |acc, i| acc + volumes[i].clone());
    if overlap.is_zero() {
        return Err(DecompError::ZeroOverlap);
    }
    if let Some(i) = (0..n).find(|&i| !a[i] && !b[i] && !f[i].is_zero()) {
        return Err(DecompError::Mismatch(format!("f is nonzero on cell {i} outside A ∪ B")));
    }
    let total = dot(f, volumes, |_| true);
    let scale = l1(f, volumes);
    if !T::negligible(&total, &scale) {
        return Err(DecompError::NotMeanZeroScalar);
    }
    let mass_a = dot(f, volumes, |i| a[i]);
    let shift = mass_a / overlap;
    let mut f_a = Vec::with_capacity(n);
    let mut f_b = Vec::with_capacity(n);
    for i in 0..n {
        let (x, y) = match (a[i], b[i]) {
            (true, true) => (f[i].clone() - shift.clone(), shift.clone()),
            (true, false) => (f[i].clone(), T::zero()),
            (false, true) => (T::zero(), f[i].clone()),
            (false, false) => (T::zero(), T::zero()),
        };
        f_a.push(x);
        f_b.push(y);
    }
    Ok(SplitPair { f_a, f_b })
}

/// Checks supports, means and `f_A + f_B = f`.
pub fn check_split<T: Scalar>(
    volumes: &[T],
    f: &[T],
    a: &[bool],
    b: &[bool],
    parts: &SplitPair<T>,
) -> SplitCheck {
    let scale = l1(f, volumes);
    let n = f.len();
    let sum = (0..n).all(|i| {
        let d = parts.f_a[i].clone() + parts.f_b[i].clone() - f[i].clone();
        let size = parts.f_a[i].magnitude() + parts.f_b[i].magnitude() + f[i].magnitude();
        T::negligible(&d, &size)
    });
    SplitCheck {
        support_a: (0..n).all(|i| a[i] || parts.f_a[i].is_zero()),
        support_b: (0..n).all(|i| b[i] || parts.f_b[i].is_zero()),
        mean_a: T::negligible(&dot(&parts.f_a, volumes, |_| true), &scale),
        mean_b: T::negligible(&dot(&parts.f_b, volumes, |_| true), &scale),
        sum,
    }
}

/// Splits along a chain of patches `P_0, …, P_m`: first `A = P_m`,
/// `B = P_0 ∪ … ∪ P_{m-1}`, then the `B` part again, down to `P_0`.
/// Returns one piece per patch.
pub fn split_chain<T: Scalar>(
    volumes: &[T],
    f: &[T],
    patches: &[Vec<bool>],
) -> Result<Vec<Vec<T>>, DecompError> {
    let n = volumes.len();
    if patches.is_empty() {
        return Err(DecompError::Mismatch("no patches".into()));
    }
    if patches.iter().any(|p| p.len() != n) {
        return Err(DecompError::Mismatch("patch mask length".into()));
    }
    let mut pieces = vec![Vec::new(); patches.len()];
    let mut rest = f.to_vec();
    for m in (1..patches.len()).rev() {
        let below: Vec<bool> = (0..n).map(|i| patches[..m].iter().any(|p| p[i])).collect();
        let SplitPair { f_a, f_b } = split_pair(volumes, &rest, &patches[m], &below)?;
        pieces[m] = f_a;
        rest = f_b;
    }
    if let Some(i) = (0..n).find(|&i| !patches[0][i] && !rest[i].is_zero()) {
        return Err(DecompError::Mismatch(format!("f is nonzero on cell {i} outside every patch")));
    }
    pieces[0] = rest;
    Ok(pieces)
}

/// `(‖f_A‖ + ‖f_B‖) / ‖f‖` in `L^q(ω^{-q})`, with `ω` constant per cell.
pub fn split_norm_ratio(volumes: &[f64], omega: &[f64], q: f64, f: &[f64], parts: &SplitPair<f64>) -> f64 {
    let norm = |g: &[f64]| -> f64 {
        g.iter()
            .zip(volumes)
            .zip(omega)
            .map(|((v, w), o)| w * (v.abs() / o).powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    };
    let base = norm(f);
    if base == 0.0 {
        0.0
    } else {
        (norm(&parts.f_a) + norm(&parts.f_b)) / base
    }
}
