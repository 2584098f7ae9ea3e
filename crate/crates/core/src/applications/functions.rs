use serde::{Deserialize, Serialize};

use super::ApplicationError;

/// Catalog of closed-form test functions and fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `f ≡ c`.
    Constant { c: f64 },
    /// `f(x) = a·x + b`.
    Linear { coeffs: Vec<f64>, offset: f64 },
    /// `f(x) = c x_i^k`.
    Monomial { axis: usize, power: u32, scale: f64 },
    /// `f(x) = (top - x_n)^γ`, a power of the distance to the plane `x_n = top`.
    VerticalPower { top: f64, gamma: f64 },
    /// `f(x) = sin(ω x_i)`.
    Sine { axis: usize, freq: f64 },
    /// `u(x) = (x_2, -x_1, 0, …)`.
    Rotation,
    /// `u(x) = M x`.
    Affine { matrix: Vec<Vec<f64>> },
    /// `u(x) = (x_2², x_1 x_2, 0, …)`.
    QuadraticField,
}

impl TestFunction {
    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Constant { .. } => "constant",
            TestFunction::Linear { .. } => "linear",
            TestFunction::Monomial { .. } => "monomial",
            TestFunction::VerticalPower { .. } => "vertical_power",
            TestFunction::Sine { .. } => "sine",
            TestFunction::Rotation => "rotation",
            TestFunction::Affine { .. } => "affine",
            TestFunction::QuadraticField => "quadratic_field",
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(
            self,
            TestFunction::Rotation | TestFunction::Affine { .. } | TestFunction::QuadraticField
        )
    }

    /// Rejects parameters that do not fit dimension `n`.
    pub fn validate(&self, n: usize) -> Result<(), ApplicationError> {
        let bad = |m: String| Err(ApplicationError::InvalidFunction(m));
        match self {
            TestFunction::Linear { coeffs, .. } if coeffs.len() != n => {
                bad(format!("{} coefficients in dimension {n}", coeffs.len()))
            }
            TestFunction::Monomial { axis, .. } | TestFunction::Sine { axis, .. } if *axis >= n => {
                bad(format!("axis {axis} in dimension {n}"))
            }
            TestFunction::Affine { matrix } if matrix.len() != n || matrix.iter().any(|r| r.len() != n) => {
                bad(format!("affine map must be {n}×{n}"))
            }
            TestFunction::Rotation | TestFunction::QuadraticField if n < 2 => bad("field needs n >= 2".into()),
            _ => Ok(()),
        }
    }

    /// Scalar value; fields return their first component.
    pub fn value(&self, x: &[f64]) -> f64 {
        let n = x.len();
        match self {
            TestFunction::Constant { c } => *c,
            TestFunction::Linear { coeffs, offset } => {
                coeffs.iter().zip(x).map(|(a, y)| a * y).sum::<f64>() + offset
            }
            TestFunction::Monomial { axis, power, scale } => scale * x[*axis].powi(*power as i32),
            TestFunction::VerticalPower { top, gamma } => (top - x[n - 1]).powf(*gamma),
            TestFunction::Sine { axis, freq } => (freq * x[*axis]).sin(),
            _ => self.field(x)[0],
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut g = vec![0.0; n];
        match self {
            TestFunction::Constant { .. } => {}
            TestFunction::Linear { coeffs, .. } => g.copy_from_slice(coeffs),
            TestFunction::Monomial { axis, power, scale } => {
                if *power > 0 {
                    g[*axis] = scale * *power as f64 * x[*axis].powi(*power as i32 - 1);
                }
            }
            TestFunction::VerticalPower { top, gamma } => {
                g[n - 1] = -gamma * (top - x[n - 1]).powf(gamma - 1.0);
            }
            TestFunction::Sine { axis, freq } => g[*axis] = freq * (freq * x[*axis]).cos(),
            _ => return self.jacobian(x)[0].clone(),
        }
        g
    }

    /// Vector value `u(x)`; a scalar function is its own first component.
    pub fn field(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut u = vec![0.0; n];
        match self {
            TestFunction::Rotation => {
                u[0] = x[1];
                u[1] = -x[0];
            }
            TestFunction::Affine { matrix } => {
                for (ui, row) in u.iter_mut().zip(matrix) {
                    *ui = row.iter().zip(x).map(|(m, y)| m * y).sum();
                }
            }
            TestFunction::QuadraticField => {
                u[0] = x[1] * x[1];
                u[1] = x[0] * x[1];
            }
            _ => u[0] = self.value(x),
        }
        u
    }

    /// `Du[i][j] = ∂u_i/∂x_j`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = x.len();
        let mut j = vec![vec![0.0; n]; n];
        match self {
            TestFunction::Rotation => {
                j[0][1] = 1.0;
                j[1][0] = -1.0;
            }
            TestFunction::Affine { matrix } => {
                for (r, m) in j.iter_mut().zip(matrix) {
                    r.copy_from_slice(m);
                }
            }
            TestFunction::QuadraticField => {
                j[0][1] = 2.0 * x[1];
                j[1][0] = x[1];
                j[1][1] = x[0];
            }
            _ => j[0] = self.gradient(x),
        }
        j
    }

    /// Largest relative deviation between the closed-form derivative and
    /// central differences with step `h` at `x`.
    pub fn derivative_check(&self, x: &[f64], h: f64) -> f64 {
        let n = x.len();
        let exact = self.jacobian(x);
        let scale = exact
            .iter()
            .flatten()
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for k in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            let (up, um) = (self.field(&xp), self.field(&xm));
            for i in 0..n {
                let fd = (up[i] - um[i]) / (2.0 * h);
                worst = worst.max((fd - exact[i][k]).abs() / scale);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<TestFunction> {
        vec![
            TestFunction::Constant { c: 2.0 },
            TestFunction::Linear {
                coeffs: vec![1.0, -2.0],
                offset: 0.5,
            },
            TestFunction::Monomial {
                axis: 1,
                power: 3,
                scale: 2.0,
            },
            TestFunction::VerticalPower { top: 3.0, gamma: -0.4 },
            TestFunction::Sine { axis: 0, freq: 3.0 },
            TestFunction::Rotation,
            TestFunction::Affine {
                matrix: vec![vec![1.0, 2.0], vec![0.0, -1.0]],
            },
            TestFunction::QuadraticField,
        ]
    }

    #[test]
    fn derivatives_match_differences() {
        let pts = [[0.1, 0.7], [-0.3, 2.2], [0.45, 1.9]];
        for f in catalog() {
            f.validate(2).unwrap();
            for x in &pts {
                let d = 0.05;
                let err = f.derivative_check(x, 1e-5 * d);
                assert!(err < 1e-6, "{}: {err}", f.name());
            }
        }
    }

    #[test]
    fn rotation_is_antisymmetric() {
        let j = TestFunction::Rotation.jacobian(&[0.3, 0.2]);
        assert_eq!(j, vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
    }

    #[test]
    fn validation() {
        assert!(TestFunction::Linear {
            coeffs: vec![1.0],
            offset: 0.0
        }
        .validate(2)
        .is_err());
        assert!(TestFunction::Sine { axis: 2, freq: 1.0 }.validate(2).is_err());
    }
}
