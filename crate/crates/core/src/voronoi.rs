//! Two-sided numerical check of Voronoi summation for level-one eigenforms:
//!
//! Σ λ(n) e(bn/c) V(n/N) = (N/c) Σ λ(n) e(−b̄n/c) · 2π i^κ ∫ V(x) J_{κ−1}(4π√(nNx)/c) dx.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::mod_inverse;
use crate::coeffs::{divisor_sieve, Eigenform};
use crate::quad::Tolerance;
use crate::sum::pairwise_complex;
use crate::windows::wstar::{bessel_window_integral, i_pow};
use crate::windows::SmoothWindow;
use crate::{e_rational, Error, Result};

#[derive(Debug, Clone)]
pub struct VoronoiInstance<'a> {
    pub form: &'a Eigenform,
    pub b: i64,
    pub c: u64,
    pub n_scale: f64,
    pub window: SmoothWindow,
    /// Number of dual terms; `None` chooses it adaptively.
    pub rhs_truncation: Option<usize>,
}

impl<'a> VoronoiInstance<'a> {
    pub fn new(form: &'a Eigenform, b: i64, c: u64, n_scale: f64, window: SmoothWindow) -> Self {
        Self { form, b, c, n_scale, window, rhs_truncation: None }
    }

    fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(Error::ZeroModulus);
        }
        if !(self.n_scale > 0.0 && self.n_scale.is_finite()) {
            return Err(Error::Precondition(format!("N must be positive, got {}", self.n_scale)));
        }
        if (self.b.unsigned_abs()).gcd(&self.c) != 1 {
            return Err(Error::Precondition(format!("gcd(b, c) = gcd({}, {}) ≠ 1", self.b, self.c)));
        }
        Ok(())
    }
}

/// Σ_n λ(n) e(bn/c) V(n/N) over the support n/N ∈ (1, 2).
pub fn voronoi_lhs(inst: &VoronoiInstance) -> Result<Complex64> {
    inst.validate()?;
    let (a, b) = inst.window.support();
    let lo = (a * inst.n_scale).floor() as usize + 1;
    let hi = (b * inst.n_scale).ceil() as usize;
    inst.form.require(hi)?;
    let terms: Vec<Complex64> = (lo.max(1)..=hi)
        .map(|n| {
            let v = inst.window.eval(n as f64 / inst.n_scale);
            e_rational(inst.b as i128 * n as i128, inst.c) * v * inst.form.lambda(n)
        })
        .collect();
    Ok(pairwise_complex(&terms))
}

#[derive(Debug, Clone, Serialize)]
pub struct RhsValue {
    pub value: Complex64,
    pub terms: usize,
    /// Σ of |term| over the second half of the dual range (adaptive mode only).
    pub tail_estimate: f64,
    pub quadrature_tolerance: f64,
}

const QUADRATURE: Tolerance = Tolerance { abs: 1e-17, rel: 1e-13 };
/// A dual term is negligible below this fraction of the largest term seen, or
/// at the quadrature's absolute noise floor.
const NEGLIGIBLE: f64 = 1e-13;
const CHUNK: usize = 256;

/// (N/c)·2π i^κ·∫V(x)J_{κ−1}(4π√(nNx)/c)dx, without λ(n) and the additive twist.
fn dual_kernel(inst: &VoronoiInstance, n: usize) -> Result<Complex64> {
    let nu = f64::from(inst.form.weight() - 1);
    let w = n as f64 * inst.n_scale / (inst.c as f64 * inst.c as f64);
    let integral = bessel_window_integral(&inst.window, nu, 0.0, w, scaled_tolerance(inst))?;
    Ok(i_pow(inst.form.weight()) * integral * (TAU * inst.n_scale / inst.c as f64))
}

fn scaled_tolerance(inst: &VoronoiInstance) -> Tolerance {
    Tolerance { abs: QUADRATURE.abs * inst.window.amplitude.abs().max(f64::MIN_POSITIVE), ..QUADRATURE }
}

/// The truncated dual side. In adaptive mode the sum runs until every term of a
/// run of K consecutive n past the Bessel turning point is below 10⁻¹³ of the
/// largest term (with τ(n) as the coefficient majorant), then the range is doubled
/// and the doubled half is reported as the tail estimate.
pub fn voronoi_rhs(inst: &VoronoiInstance) -> Result<RhsValue> {
    inst.validate()?;
    let bbar = mod_inverse(inst.b as i128, inst.c).expect("b is a unit mod c") as i128;
    let term = |n: usize, kernel: Complex64| -> Complex64 {
        e_rational(-bbar * n as i128, inst.c) * kernel * inst.form.lambda(n)
    };
    if inst.window.is_zero() {
        return Ok(RhsValue { value: Complex64::new(0.0, 0.0), terms: 0, tail_estimate: 0.0, quadrature_tolerance: 0.0 });
    }
    let kernels = |lo: usize, hi: usize| -> Result<Vec<Complex64>> {
        (lo..hi).into_par_iter().map(|n| dual_kernel(inst, n)).collect()
    };
    if let Some(count) = inst.rhs_truncation {
        inst.form.require(count)?;
        let ks = kernels(1, count + 1)?;
        let terms: Vec<Complex64> = ks.iter().enumerate().map(|(i, &k)| term(i + 1, k)).collect();
        return Ok(RhsValue {
            value: pairwise_complex(&terms),
            terms: count,
            tail_estimate: f64::NAN,
            quadrature_tolerance: QUADRATURE.rel,
        });
    }

    let nu = f64::from(inst.form.weight() - 1);
    let (_, top) = inst.window.support();
    let c = inst.c as f64;
    let n_scale = inst.n_scale;
    // Largest Bessel argument 4π√(n N top)/c reaches the order ν here.
    let turning = ((nu * c / (4.0 * PI)).powi(2) / (n_scale * top)).ceil() as usize;
    let run_length = |n: usize| -> usize {
        let d_omega = PI * n_scale.sqrt() / (c * (n as f64).sqrt());
        (4.0 * PI / d_omega).ceil().max(8.0) as usize
    };

    // Quadrature noise in a single kernel value.
    let floor = 10.0 * scaled_tolerance(inst).abs * TAU * n_scale / c;
    let mut kernel_values: Vec<Complex64> = Vec::new();
    let mut largest = 0.0f64;
    let mut quiet = 0usize;
    let mut tau = divisor_sieve(2, CHUNK)?;
    let mut cutoff = None;
    while cutoff.is_none() {
        let lo = kernel_values.len() + 1;
        let hi = lo + CHUNK;
        if tau.len() <= hi {
            tau = divisor_sieve(2, 2 * hi)?;
        }
        kernel_values.extend(kernels(lo, hi)?);
        for n in lo..hi {
            let mag = kernel_values[n - 1].norm() * tau[n] as f64;
            largest = largest.max(mag);
            if n > turning && mag <= (NEGLIGIBLE * largest).max(floor * tau[n] as f64) {
                quiet += 1;
                if quiet >= run_length(n) {
                    cutoff = Some(n);
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if kernel_values.len() > 5_000_000 {
            return Err(Error::Quadrature("dual Voronoi sum did not become negligible".into()));
        }
    }
    let cutoff = cutoff.expect("loop exits with a cutoff");
    let total = 2 * cutoff;
    inst.form.require(total)?;
    if kernel_values.len() < total {
        let lo = kernel_values.len() + 1;
        kernel_values.extend(kernels(lo, total + 1)?);
    }
    let terms: Vec<Complex64> = (1..=total).map(|n| term(n, kernel_values[n - 1])).collect();
    let tail_estimate = terms[cutoff..].iter().map(|t| t.norm()).sum();
    Ok(RhsValue {
        value: pairwise_complex(&terms),
        terms: total,
        tail_estimate,
        quadrature_tolerance: QUADRATURE.rel,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VoronoiCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub relative_error: f64,
    pub rhs_terms: usize,
    pub tail_estimate: f64,
    pub quadrature_tolerance: f64,
}

pub const EPS0: f64 = 1e-300;

/// |LHS − RHS| / (|LHS| + |RHS| + ε₀).
pub fn voronoi_check(inst: &VoronoiInstance) -> Result<VoronoiCheck> {
    let lhs = voronoi_lhs(inst)?;
    let rhs = voronoi_rhs(inst)?;
    Ok(VoronoiCheck {
        lhs,
        rhs: rhs.value,
        relative_error: (lhs - rhs.value).norm() / (lhs.norm() + rhs.value.norm() + EPS0),
        rhs_terms: rhs.terms,
        tail_estimate: rhs.tail_estimate,
        quadrature_tolerance: rhs.quadrature_tolerance,
    })
}

/// The dual term for a single n, exposed for decay diagnostics.
pub fn dual_term(inst: &VoronoiInstance, n: usize) -> Result<Complex64> {
    inst.validate()?;
    dual_kernel(inst, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::make_eigenform;
    use crate::sum::Compensated;
    use crate::windows::bump_window;

    #[test]
    fn lhs_matches_reverse_order_sum() {
        let f = make_eigenform(12, 200).unwrap();
        let inst = VoronoiInstance::new(&f, 1, 1, 50.0, bump_window());
        let got = voronoi_lhs(&inst).unwrap();
        let mut oracle = Compensated::default();
        for n in (1..=100).rev() {
            oracle.add(f.lambda(n) * bump_window().value(n as f64 / 50.0));
        }
        assert!((got.re - oracle.value()).abs() < 1e-12 && got.im.abs() < 1e-12);
    }

    #[test]
    fn periodic_in_b_and_zero_window() {
        let f = make_eigenform(12, 200).unwrap();
        let a = voronoi_lhs(&VoronoiInstance::new(&f, 2, 5, 50.0, bump_window())).unwrap();
        let b = voronoi_lhs(&VoronoiInstance::new(&f, 7, 5, 50.0, bump_window())).unwrap();
        assert!((a - b).norm() < 1e-15);
        let zero = VoronoiInstance::new(&f, 1, 3, 50.0, SmoothWindow::zero());
        assert_eq!(voronoi_lhs(&zero).unwrap().norm(), 0.0);
        assert_eq!(voronoi_rhs(&zero).unwrap().value.norm(), 0.0);
    }

    #[test]
    fn contract_violations() {
        let f = make_eigenform(12, 200).unwrap();
        let bad = VoronoiInstance::new(&f, 2, 4, 50.0, bump_window());
        assert!(matches!(voronoi_rhs(&bad), Err(Error::Precondition(_))));
        let short = VoronoiInstance::new(&f, 1, 1, 150.0, bump_window());
        assert!(matches!(voronoi_lhs(&short), Err(Error::InsufficientCoefficients { .. })));
    }

    #[test]
    fn small_argument_terms_scale_like_the_leading_bessel_term() {
        let f = make_eigenform(12, 10).unwrap();
        let inst = VoronoiInstance::new(&f, 1, 1000, 50.0, bump_window());
        let t1 = dual_term(&inst, 1).unwrap().norm();
        let t2 = dual_term(&inst, 2).unwrap().norm();
        let t4 = dual_term(&inst, 4).unwrap().norm();
        assert!((t2 / t1 / 2f64.powf(5.5) - 1.0).abs() < 1e-3);
        assert!((t4 / t2 / 2f64.powf(5.5) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn identity_holds_for_delta() {
        let f = make_eigenform(12, 20_000).unwrap();
        let inst = VoronoiInstance::new(&f, 1, 2, 100.0, bump_window());
        let check = voronoi_check(&inst).unwrap();
        assert!(check.relative_error < 1e-6, "{check:?}");
        let conj = voronoi_check(&VoronoiInstance::new(&f, -1, 2, 100.0, bump_window())).unwrap();
        assert!((conj.lhs - check.lhs.conj()).norm() < 1e-9);
        assert!((conj.rhs - check.rhs.conj()).norm() < 1e-9);
    }
}
