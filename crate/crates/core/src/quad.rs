//! Gauss–Legendre quadrature with period-resolved composite panels.

use std::ops::{Add, Mul};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::{Error, Result};

/// Values the integrators can accumulate.
pub trait Scalar: Copy + Add<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    const ZERO: Self;
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫_a^b f with this rule on a single panel.
    pub fn apply<T: Scalar>(&self, a: f64, b: f64, f: &mut impl FnMut(f64) -> T) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::ZERO;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The 16-point rule used by every composite integrator.
pub fn gl16() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::gauss_legendre(16))
}

/// ∫_a^b f over `panels` equal panels of the 16-point rule.
pub fn composite<T: Scalar>(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> T) -> T {
    let rule = gl16();
    let h = (b - a) / panels as f64;
    let mut acc = T::ZERO;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = if p + 1 == panels { b } else { lo + h };
        acc = acc + rule.apply(lo, hi, &mut f);
    }
    acc
}

/// Convergence target: met when the change is below `abs` or below `rel`·|value|.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    fn met(&self, change: f64, value: f64) -> bool {
        change <= self.abs || change <= self.rel * value
    }
}

const MAX_PANELS: usize = 1 << 22;

/// ∫_a^b f for an integrand whose fastest phase has angular frequency at most
/// `max_freq` (radians per unit). Starts at ≥ 8 nodes per period and doubles the
/// panel count until two successive values agree to `tol`.
pub fn oscillatory<T: Scalar>(
    a: f64,
    b: f64,
    max_freq: f64,
    min_panels: usize,
    tol: Tolerance,
    mut f: impl FnMut(f64) -> T,
) -> Result<T> {
    if b <= a {
        return Ok(T::ZERO);
    }
    let periods = (b - a) * max_freq.abs() / std::f64::consts::TAU;
    let mut panels = ((periods / 2.0).ceil() as usize).max(min_panels).max(1);
    let mut prev = composite(a, b, panels, &mut f);
    loop {
        panels *= 2;
        if panels > MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] with {MAX_PANELS} panels"
            )));
        }
        let next = composite(a, b, panels, &mut f);
        let change = (next + prev * -1.0).magnitude();
        if tol.met(change, next.magnitude()) {
            return Ok(next);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let r = Rule::gauss_legendre(16);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        for deg in 0..=31u32 {
            let got = r.apply(0.0, 1.0, &mut |x: f64| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let r = gl16();
        for i in 0..16 {
            assert!((r.nodes[i] + r.nodes[15 - i]).abs() < 1e-15);
        }
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn oscillatory_integral() {
        // ∫_0^π e^{iωx} dx = (e^{iωπ} − 1)/(iω)
        let w = 301.0;
        let got: Complex64 = oscillatory(0.0, std::f64::consts::PI, w, 2, Tolerance::absolute(1e-13), |x| {
            Complex64::from_polar(1.0, w * x)
        })
        .unwrap();
        let want = (Complex64::from_polar(1.0, w * std::f64::consts::PI) - 1.0) / Complex64::new(0.0, w);
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn empty_interval() {
        let v: f64 = oscillatory(1.0, 1.0, 0.0, 1, Tolerance::absolute(1e-12), |_| 1.0).unwrap();
        assert_eq!(v, 0.0);
    }
}
