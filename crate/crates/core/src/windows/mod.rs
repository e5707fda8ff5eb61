//! Smooth windows, Bessel functions and the integral transforms built from them.

pub mod bessel;
pub mod kuznetsov;
pub mod wstar;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quad::{oscillatory, Tolerance};
use crate::{e, Result};

pub use bessel::{bessel_j, BesselKernel, BesselStrategy};
pub use kuznetsov::{
    dot_decay_profile, kuznetsov_transform_dot, kuznetsov_transform_tilde, Sign, TransformKernel,
};
pub use wstar::{extract_oscillatory_parts, w_star, OscillatoryParts};

/// amplitude · W(x) · e(ηx) with W(x) = exp(−1/((x−1)(2−x))) on (1, 2) and 0 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothWindow {
    pub amplitude: f64,
    pub eta: f64,
}

pub const SUPPORT: (f64, f64) = (1.0, 2.0);

pub fn bump_window() -> SmoothWindow {
    SmoothWindow { amplitude: 1.0, eta: 0.0 }
}

impl SmoothWindow {
    pub fn zero() -> Self {
        Self { amplitude: 0.0, eta: 0.0 }
    }

    pub fn scaled(self, k: f64) -> Self {
        Self { amplitude: self.amplitude * k, ..self }
    }

    pub fn modulated(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn support(&self) -> (f64, f64) {
        SUPPORT
    }

    /// amplitude · W(x), without the modulation.
    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// amplitude · W^{(j)}(x) for j ≤ 4, in closed form.
    pub fn derivative(&self, j: usize, x: f64) -> f64 {
        assert!(j <= 4, "window derivatives are provided up to order 4");
        if x <= 1.0 || x >= 2.0 || self.amplitude == 0.0 {
            return 0.0;
        }
        // W = exp(−1/p), p = (x−1)(2−x), p' = 3 − 2x, p'' = −2.
        let p = (x - 1.0) * (2.0 - x);
        let w = (-1.0 / p).exp();
        if w == 0.0 {
            return 0.0;
        }
        let (d1, d2) = (3.0 - 2.0 * x, -2.0);
        let u = 1.0 / p;
        // Derivatives of g = −1/p.
        let g1 = d1 * u * u;
        let g2 = d2 * u * u - 2.0 * d1 * d1 * u.powi(3);
        let g3 = -6.0 * d1 * d2 * u.powi(3) + 6.0 * d1.powi(3) * u.powi(4);
        let g4 = -6.0 * d2 * d2 * u.powi(3) + 36.0 * d1 * d1 * d2 * u.powi(4)
            - 24.0 * d1.powi(4) * u.powi(5);
        let factor = match j {
            0 => 1.0,
            1 => g1,
            2 => g2 + g1 * g1,
            3 => g3 + 3.0 * g1 * g2 + g1.powi(3),
            _ => g4 + 4.0 * g1 * g3 + 3.0 * g2 * g2 + 6.0 * g1 * g1 * g2 + g1.powi(4),
        };
        self.amplitude * w * factor
    }

    /// W_η(x) = amplitude · W(x) · e(ηx).
    pub fn eval(&self, x: f64) -> Complex64 {
        let v = self.value(x);
        if self.eta == 0.0 {
            Complex64::new(v, 0.0)
        } else {
            e(self.eta * x) * v
        }
    }
}

/// Ŵ(s) = ∫ W_η(x) x^{s−1} dx.
pub fn mellin_at(window: &SmoothWindow, s: Complex64) -> Result<Complex64> {
    if window.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (a, b) = window.support();
    let freq = s.im.abs() / a + std::f64::consts::TAU * window.eta.abs();
    let tol = Tolerance { abs: 1e-16, rel: 1e-13 };
    oscillatory(a, b, freq, 4, tol, |x| window.eval(x) * ((s - 1.0) * x.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        let w = bump_window();
        assert_eq!(w.value(1.0), 0.0);
        assert_eq!(w.value(2.0), 0.0);
        assert!((w.value(1.5) - (-4.0f64).exp()).abs() < 1e-17);
        assert!(w.derivative(1, 1.5).abs() < 1e-17);
        assert_eq!(w.derivative(3, 0.5), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let w = bump_window();
        let h = 1e-4;
        for j in 1..=4 {
            for &x in &[1.2, 1.37, 1.5, 1.71, 1.85] {
                let fd = (w.derivative(j - 1, x + h) - w.derivative(j - 1, x - h)) / (2.0 * h);
                let exact = w.derivative(j, x);
                let scale = exact.abs().max(w.derivative(j - 1, x).abs());
                assert!((fd - exact).abs() < 1e-5 * scale, "order {j} at {x}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn derivatives_vanish_at_the_edges() {
        let w = bump_window();
        for j in 0..=4 {
            assert!(w.derivative(j, 1.0 + 1e-3).abs() < 1e-100);
            assert!(w.derivative(j, 2.0 - 1e-3).abs() < 1e-100);
        }
    }

    #[test]
    fn mellin_at_one_is_the_mass() {
        let v = mellin_at(&bump_window(), Complex64::new(1.0, 0.0)).unwrap();
        // Independent high-precision quadrature of ∫₁² W.
        assert!((v.re - 0.007_029_858_406_609_656).abs() < 1e-14);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn mellin_decays_on_vertical_lines() {
        let w = bump_window();
        assert!(mellin_at(&w, Complex64::new(1.0, 1000.0)).unwrap().norm() < 1e-8);
        for t in [500.0, 750.0, 1000.0, -600.0] {
            assert!(mellin_at(&w, Complex64::new(0.0, t)).unwrap().norm() <= 1e-6);
        }
        assert_eq!(mellin_at(&SmoothWindow::zero(), Complex64::new(1.0, 0.0)).unwrap().norm(), 0.0);
    }
}
