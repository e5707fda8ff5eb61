//! The holomorphic and Maass-side Kuznetsov transforms of
//! φ(z) = e^{±izα} w(z/𝒵) (z/𝒵)^{iτ}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::wstar::i_pow;
use super::{BesselKernel, SmoothWindow};
use crate::fit::{fit_loglog, LineFit};
use crate::quad::{composite, oscillatory, Tolerance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TransformKernel {
    pub z_scale: f64,
    pub alpha: f64,
    pub tau: f64,
    pub sign: Sign,
    pub window: SmoothWindow,
}

pub const MAX_ALPHA: f64 = 0.8;

impl TransformKernel {
    pub fn new(z_scale: f64, alpha: f64, tau: f64, sign: Sign) -> Result<Self> {
        Self::with_window(z_scale, alpha, tau, sign, super::bump_window())
    }

    pub fn with_window(
        z_scale: f64,
        alpha: f64,
        tau: f64,
        sign: Sign,
        window: SmoothWindow,
    ) -> Result<Self> {
        if !(z_scale > 0.0 && z_scale.is_finite()) {
            return Err(Error::Precondition(format!("𝒵 must be positive, got {z_scale}")));
        }
        if !(alpha.abs() <= MAX_ALPHA) || !tau.is_finite() {
            return Err(Error::Precondition(format!("need |α| ≤ 4/5 and finite τ, got α={alpha}, τ={tau}")));
        }
        Ok(Self { z_scale, alpha, tau, sign, window })
    }

    fn signed_alpha(&self) -> f64 {
        match self.sign {
            Sign::Plus => self.alpha,
            Sign::Minus => -self.alpha,
        }
    }

    /// φ(x).
    pub fn phi(&self, x: f64) -> Complex64 {
        let y = x / self.z_scale;
        let w = self.window.eval(y);
        if w == Complex64::new(0.0, 0.0) {
            return w;
        }
        w * Complex64::from_polar(1.0, self.signed_alpha() * x + self.tau * y.ln())
    }

    fn range(&self) -> (f64, f64) {
        let (a, b) = self.window.support();
        (a * self.z_scale, b * self.z_scale)
    }

    /// Largest angular frequency of φ in x.
    fn phase_rate(&self) -> f64 {
        let (a, _) = self.range();
        self.alpha.abs() + self.tau.abs() / a + std::f64::consts::TAU * self.window.eta.abs() / self.z_scale
    }
}

/// φ̇(k) = 4 i^k ∫ φ(x) J_{k−1}(x) dx/x for even k ≥ 2.
pub fn kuznetsov_transform_dot(kernel: &TransformKernel, k: u32) -> Result<Complex64> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::Precondition(format!("φ̇(k) needs even k ≥ 2, got {k}")));
    }
    if kernel.window.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (a, b) = kernel.range();
    let bessel = BesselKernel::new(f64::from(k - 1));
    // Relative accuracy matters: the decay profile reads off values far below 1e−10.
    let tol = Tolerance { abs: 1e-18 * kernel.window.amplitude.abs(), rel: 1e-10 };
    let freq = kernel.phase_rate() + 1.0;
    let integral = oscillatory(a, b, freq, 8, tol, |x| kernel.phi(x) * (bessel.eval(x) / x))?;
    Ok(i_pow(k) * integral * 4.0)
}

/// Fitted slope of log|φ̇(k)| against log(1 + k/𝒵). Values that underflow to 0 are dropped.
pub fn dot_decay_profile(kernel: &TransformKernel, ks: &[u32]) -> Result<(LineFit, Vec<(u32, f64)>)> {
    let mut points = Vec::new();
    for &k in ks {
        let v = kuznetsov_transform_dot(kernel, k)?.norm();
        if v > 0.0 {
            points.push((k, v));
        }
    }
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "only {} non-zero transform values",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|&(k, _)| 1.0 + f64::from(k) / kernel.z_scale).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v).collect();
    Ok((fit_loglog(&xs, &ys)?, points))
}

/// Beyond this product of 𝒵 and distance to the phase of φ, Φ(u) is below double precision.
const FOURIER_CUTOFF: f64 = 1000.0;

/// φ̃(t) = 2πi ∫ φ(x) (J_{2it}(x) − J_{−2it}(x))/sinh(πt) dx/x.
///
/// Mehler's representation (J_{2it} − J_{−2it})/sinh(πt) = −(4i/π)∫₀^∞ cos(x cosh s) cos(2ts) ds
/// turns this into 8∫₀^∞ cos(2ts) Φ(cosh s) ds with Φ(u) = ∫ φ(x) cos(ux) dx/x. Since
/// |α| < 1 ≤ cosh s, Φ(cosh s) is a Fourier transform of a smooth window away from
/// its phase and the s-integral can be cut off once that transform is negligible.
pub fn kuznetsov_transform_tilde(kernel: &TransformKernel, t: f64) -> Result<Complex64> {
    if !t.is_finite() {
        return Err(Error::Precondition(format!("t must be finite, got {t}")));
    }
    if kernel.window.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let z = kernel.z_scale;
    let u_max = (FOURIER_CUTOFF + kernel.tau.abs()) / z + kernel.alpha.abs();
    let s_max = u_max.max(1.0).acosh();
    let inner = InnerTransform::new(kernel, u_max)?;
    let (_, b) = kernel.range();
    // Φ(cosh s) oscillates in s at rate up to x·sinh s for x in the support.
    let freq = 2.0 * t.abs() + b * s_max.sinh().max(1.0);
    let tol = Tolerance { abs: 1e-14, rel: 1e-11 };
    let outer = oscillatory(0.0, s_max, freq, 16, tol, |s| inner.eval(s.cosh()) * (2.0 * t * s).cos())?;
    Ok(outer * 8.0)
}

/// Φ(u) = ∫ φ(x) cos(ux) dx/x on a fixed composite Gauss–Legendre grid fine enough
/// for every u ≤ u_max.
struct InnerTransform {
    nodes: Vec<f64>,
    weights: Vec<Complex64>,
}

impl InnerTransform {
    fn new(kernel: &TransformKernel, u_max: f64) -> Result<Self> {
        let (a, b) = kernel.range();
        let freq = u_max + kernel.phase_rate();
        let periods = (b - a) * freq / std::f64::consts::TAU;
        let mut panels = ((periods / 2.0).ceil() as usize).max(8);
        let probe = |panels: usize, u: f64| -> Complex64 {
            composite(a, b, panels, |x| kernel.phi(x) * ((u * x).cos() / x))
        };
        for _ in 0..12 {
            let ok = [1.0, 0.5 * (1.0 + u_max), u_max].iter().all(|&u| {
                let (p1, p2) = (probe(panels, u), probe(2 * panels, u));
                (p1 - p2).norm() <= 1e-16 + 1e-12 * p2.norm()
            });
            if ok {
                let rule = crate::quad::gl16();
                let h = (b - a) / panels as f64;
                let mut nodes = Vec::with_capacity(16 * panels);
                let mut weights = Vec::with_capacity(16 * panels);
                for p in 0..panels {
                    let mid = a + h * (p as f64 + 0.5);
                    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                        let node = mid + 0.5 * h * x;
                        nodes.push(node);
                        weights.push(kernel.phi(node) * (0.5 * h * w / node));
                    }
                }
                return Ok(Self { nodes, weights });
            }
            panels *= 2;
        }
        Err(Error::Quadrature("inner cosine transform did not converge".into()))
    }

    fn eval(&self, u: f64) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * (u * x).cos()).sum()
    }
}
