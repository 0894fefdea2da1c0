//! Orthonormal eigenfunctions of the m-harmonic operator on `(0, L)`.
//!
//! For `m = 1` this is the Dirichlet sine basis. For `m = 2` the modes are the
//! clamped-beam eigenfunctions (`w = w' = 0` at both ends), whose wavenumbers
//! solve `cos(κ) cosh(κ) = 1`.

use std::f64::consts::PI;

use crate::error::{Result, SolverError};
use crate::quadrature::gauss_legendre;

/// Order of the spatial operator `(-1)^m d^{2m}/dx^{2m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Laplacian,
    Biharmonic,
}

impl Order {
    pub fn from_m(m: u32) -> Result<Self> {
        match m {
            1 => Ok(Order::Laplacian),
            2 => Ok(Order::Biharmonic),
            _ => Err(SolverError::invalid(format!(
                "operator order m must be 1 or 2, got {m}"
            ))),
        }
    }

    pub fn m(self) -> u32 {
        match self {
            Order::Laplacian => 1,
            Order::Biharmonic => 2,
        }
    }
}

/// Per-mode evaluation data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeShape {
    /// `w(x) = amp * sin(freq * x)`.
    Sine { freq: f64, amp: f64 },
    /// Clamped beam mode, stored in the exponentially split form
    /// `W(x) = a e^{-k(L-x)} + b e^{-kx} - cos(kx) + σ sin(kx)` scaled by `nu`.
    Clamped {
        kappa: f64,
        k: f64,
        sigma: f64,
        a: f64,
        b: f64,
        nu: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Eigenbasis {
    order: Order,
    length: f64,
    lambdas: Vec<f64>,
    modes: Vec<ModeShape>,
}

fn check_domain(length: f64, n: usize) -> Result<()> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(SolverError::invalid(format!(
            "domain length must be positive, got {length}"
        )));
    }
    if n == 0 {
        return Err(SolverError::invalid("basis size must be at least 1"));
    }
    Ok(())
}

/// Dirichlet eigenbasis `w_j = sqrt(2/L) sin(jπx/L)`, `λ_j = (jπ/L)²`.
pub fn sine_basis(length: f64, n: usize) -> Result<Eigenbasis> {
    check_domain(length, n)?;
    let amp = (2.0 / length).sqrt();
    let modes: Vec<_> = (1..=n)
        .map(|j| ModeShape::Sine {
            freq: j as f64 * PI / length,
            amp,
        })
        .collect();
    let lambdas = modes
        .iter()
        .map(|m| match m {
            ModeShape::Sine { freq, .. } => freq * freq,
            ModeShape::Clamped { .. } => unreachable!(),
        })
        .collect();
    Ok(Eigenbasis {
        order: Order::Laplacian,
        length,
        lambdas,
        modes,
    })
}

fn beam_residual(kappa: f64) -> f64 {
    kappa.cos() - 1.0 / kappa.cosh()
}

/// First `n` positive roots of `cos κ cosh κ = 1`, solved as `cos κ = sech κ`.
///
/// Root `j` is the unique zero in `(jπ, (j+1)π)`, where `cos` is monotone.
pub fn beam_roots(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(SolverError::invalid("number of roots must be at least 1"));
    }
    let mut roots = Vec::with_capacity(n);
    for j in 1..=n {
        let mut lo = j as f64 * PI;
        let mut hi = (j + 1) as f64 * PI;
        let mut f_lo = beam_residual(lo);
        let f_hi = beam_residual(hi);
        if f_lo.signum() == f_hi.signum() {
            return Err(SolverError::Internal(format!(
                "beam root {j} not bracketed"
            )));
        }
        // bisect to adjacent floats
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = beam_residual(mid);
            if f_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        let root = if beam_residual(lo).abs() <= beam_residual(hi).abs() {
            lo
        } else {
            hi
        };
        let res = beam_residual(root).abs();
        if res >= 1e-12 {
            return Err(SolverError::Internal(format!(
                "beam root {j} refined only to residual {res:e}"
            )));
        }
        roots.push(root);
    }
    Ok(roots)
}

/// Clamped-clamped eigenbasis of `d⁴/dx⁴` on `(0, L)`, `λ_j = (κ_j / L)⁴`.
pub fn beam_basis(length: f64, n: usize) -> Result<Eigenbasis> {
    check_domain(length, n)?;
    let roots = beam_roots(n)?;
    let mut modes = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    for (j, &kappa) in roots.iter().enumerate() {
        let k = kappa / length;
        let e1 = (-kappa).exp();
        let e2 = e1 * e1;
        let (s, c) = kappa.sin_cos();
        // (sinh κ - sin κ) and (cosh κ - cos κ), both divided by e^κ / 2
        let sinh_part = 1.0 - e2 - 2.0 * s * e1;
        let cosh_part = 1.0 + e2 - 2.0 * c * e1;
        let sigma = cosh_part / sinh_part;
        let a = (c - s - e1) / sinh_part;
        let b = 0.5 * (1.0 + sigma);
        let raw = ModeShape::Clamped {
            kappa,
            k,
            sigma,
            a,
            b,
            nu: 1.0,
        };
        let norm_sq = integrate_mode_square(&raw, length, j + 1);
        let nu = 1.0 / norm_sq.sqrt();
        modes.push(ModeShape::Clamped {
            kappa,
            k,
            sigma,
            a,
            b,
            nu,
        });
        lambdas.push(k.powi(4));
    }
    Ok(Eigenbasis {
        order: Order::Biharmonic,
        length,
        lambdas,
        modes,
    })
}

fn integrate_mode_square(mode: &ModeShape, length: f64, j: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(16);
    let panels = 4 * (j + 2);
    let h = length / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let left = p as f64 * h;
        for (xi, wi) in nodes.iter().zip(&weights) {
            let x = left + 0.5 * h * (xi + 1.0);
            let v = mode_value(mode, length, x, 0);
            sum += 0.5 * h * wi * v * v;
        }
    }
    sum
}

fn mode_value(mode: &ModeShape, length: f64, x: f64, deriv: u8) -> f64 {
    match *mode {
        ModeShape::Sine { freq, amp } => {
            let (s, c) = (freq * x).sin_cos();
            match deriv {
                0 => amp * s,
                1 => amp * freq * c,
                _ => -amp * freq * freq * s,
            }
        }
        ModeShape::Clamped {
            k, sigma, a, b, nu, ..
        } => {
            let right = a * (-k * (length - x)).exp();
            let left = b * (-k * x).exp();
            let (s, c) = (k * x).sin_cos();
            let raw = match deriv {
                0 => right + left - c + sigma * s,
                1 => k * (right - left + s + sigma * c),
                _ => k * k * (right + left + c - sigma * s),
            };
            nu * raw
        }
    }
}

impl Eigenbasis {
    pub fn order(&self) -> Order {
        self.order
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn modes(&self) -> &[ModeShape] {
        &self.modes
    }

    /// Dimensionless wavenumbers: `jπ` for the sine basis, `κ_j` for beams.
    pub fn kappas(&self) -> Vec<f64> {
        self.modes
            .iter()
            .map(|m| match *m {
                ModeShape::Sine { freq, .. } => freq * self.length,
                ModeShape::Clamped { kappa, .. } => kappa,
            })
            .collect()
    }

    /// `w_j^{(deriv)}(x)` for 1-based `j`.
    pub fn eval(&self, j: usize, x: f64, deriv: u8) -> Result<f64> {
        if j == 0 || j > self.len() {
            return Err(SolverError::invalid(format!(
                "mode index {j} outside 1..={}",
                self.len()
            )));
        }
        if !(0.0..=self.length).contains(&x) {
            return Err(SolverError::invalid(format!(
                "x = {x} outside [0, {}]",
                self.length
            )));
        }
        if deriv > 2 {
            return Err(SolverError::invalid(format!(
                "derivative order {deriv} > 2"
            )));
        }
        Ok(self.value(j - 1, x, deriv))
    }

    /// Unchecked evaluation with a 0-based mode index.
    pub(crate) fn value(&self, idx: usize, x: f64, deriv: u8) -> f64 {
        mode_value(&self.modes[idx], self.length, x, deriv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sine_eigenvalues() {
        let b = sine_basis(PI, 3).unwrap();
        for (l, e) in b.lambdas().iter().zip([1.0, 4.0, 9.0]) {
            assert_relative_eq!(*l, e, epsilon = 1e-12);
        }
        let b = sine_basis(1.0, 1).unwrap();
        assert_relative_eq!(b.lambdas()[0], 9.869_604_401_089_358, epsilon = 1e-12);
    }

    #[test]
    fn sine_values() {
        let b = sine_basis(PI, 3).unwrap();
        let amp = (2.0 / PI).sqrt();
        assert_relative_eq!(b.eval(1, PI / 2.0, 0).unwrap(), amp, epsilon = 1e-14);
        assert_relative_eq!(b.eval(1, 0.0, 1).unwrap(), amp, epsilon = 1e-14);
        for i in 0..=20 {
            let x = PI * i as f64 / 20.0;
            let d2 = b.eval(2, x, 2).unwrap();
            assert!((d2 + b.lambdas()[1] * b.eval(2, x, 0).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            sine_basis(0.0, 3),
            Err(SolverError::InvalidArgument(_))
        ));
        assert!(matches!(
            sine_basis(1.0, 0),
            Err(SolverError::InvalidArgument(_))
        ));
        assert!(matches!(
            beam_basis(-1.0, 3),
            Err(SolverError::InvalidArgument(_))
        ));
        let b = sine_basis(1.0, 2).unwrap();
        assert!(b.eval(1, 1.5, 0).is_err());
        assert!(b.eval(1, -1e-3, 0).is_err());
        assert!(b.eval(3, 0.5, 0).is_err());
        assert!(b.eval(0, 0.5, 0).is_err());
        assert!(b.eval(1, 0.5, 3).is_err());
    }

    #[test]
    fn beam_roots_match_bisection_oracle() {
        // 40-digit bisection on cos κ - sech κ
        let r = beam_roots(5).unwrap();
        assert!((r[0] - 4.730_040_744_862_704).abs() < 1e-13);
        assert!((r[1] - 7.853_204_624_095_838).abs() < 1e-13);
        assert!((r[4] - 5.5 * PI).abs() < 1e-3);
        for (j, w) in r.windows(2).enumerate() {
            assert!(w[0] < w[1]);
            let j = (j + 1) as f64;
            assert!(w[0] > (j - 0.5) * PI && w[0] < (j + 1.0) * PI);
        }
    }

    #[test]
    fn beam_roots_asymptote() {
        let r = beam_roots(40).unwrap();
        for (j, k) in r.iter().enumerate() {
            assert!(beam_residual(*k).abs() < 1e-12);
            if j >= 10 {
                assert!((k - (j as f64 + 1.5) * PI).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn beam_first_eigenvalue() {
        let b = beam_basis(1.0, 1).unwrap();
        assert_relative_eq!(b.lambdas()[0], 500.563_901_740_433, max_relative = 1e-12);
    }

    #[test]
    fn beam_normalisation_is_inverse_sqrt_length() {
        // closed form ∫ W² = L for the unnormalised clamped mode
        for &len in &[1.0, 2.5] {
            let b = beam_basis(len, 12).unwrap();
            for m in b.modes() {
                if let ModeShape::Clamped { nu, .. } = m {
                    assert_relative_eq!(*nu, 1.0 / len.sqrt(), max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn beam_clamped_ends() {
        let b = beam_basis(1.0, 32).unwrap();
        for j in 1..=32 {
            for x in [0.0, 1.0] {
                assert!(b.eval(j, x, 0).unwrap().abs() < 1e-8, "w_{j}({x})");
                assert!(b.eval(j, x, 1).unwrap().abs() < 1e-8, "w_{j}'({x})");
            }
        }
    }

    #[test]
    fn beam_large_kappa_is_finite() {
        let b = beam_basis(3.0, 300).unwrap();
        let k = b.kappas()[299];
        assert!(k > 700.0);
        for i in 0..=50 {
            let v = b.eval(300, 3.0 * i as f64 / 50.0, 2).unwrap();
            assert!(v.is_finite());
        }
    }
}
