//! Exact Fourier coefficients of level-one Hecke eigenforms and divisor functions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::series::QSeries;
use crate::{Error, Result};

/// Euler's pentagonal expansion ∏(1−qⁿ) = Σ_k (−1)^k q^{k(3k−1)/2}, k ∈ ℤ.
pub fn pentagonal_series(len: usize) -> QSeries {
    let mut terms = vec![(0usize, 1i64)];
    for k in 1i64.. {
        let g1 = (k * (3 * k - 1) / 2) as usize;
        let g2 = (k * (3 * k + 1) / 2) as usize;
        if g1 >= len {
            break;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        terms.push((g1, sign));
        terms.push((g2, sign));
    }
    QSeries::from_sparse(len, terms)
}

/// Coefficients of q·∏_{n≥1}(1−qⁿ)^exponent for q¹,…,q^N.
///
/// The returned series has length N+1 and a zero constant term, so index n
/// holds the coefficient of qⁿ. For exponent 24 this is Δ.
pub fn eta_power_qexp(exponent: u32, n: usize) -> Result<QSeries> {
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    if exponent == 0 || exponent % 2 != 0 {
        return Err(Error::Precondition(format!(
            "eta exponent must be a positive even integer, got {exponent}"
        )));
    }
    let product = pentagonal_series(n).pow(exponent);
    let mut c = Vec::with_capacity(n + 1);
    c.push(BigInt::zero());
    c.extend(product.into_coefficients());
    Ok(QSeries::new(c))
}

/// σ_k(n) for 0 ≤ n < len (σ_k(0) = 0).
pub fn sigma_sieve(power: u32, len: usize) -> Vec<BigInt> {
    let mut s = vec![BigInt::zero(); len];
    for d in 1..len {
        let dk = BigInt::from(d).pow(power);
        let mut m = d;
        while m < len {
            s[m] += &dk;
            m += d;
        }
    }
    s
}

/// E₄ = 1 + 240Σσ₃(n)qⁿ or E₆ = 1 − 504Σσ₅(n)qⁿ, first N coefficients (q⁰…q^{N−1}).
pub fn eisenstein_qexp(weight: u32, n: usize) -> Result<QSeries> {
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let (scale, power) = match weight {
        4 => (240i64, 3),
        6 => (-504i64, 5),
        w => return Err(Error::UnsupportedWeight(w)),
    };
    let mut c = sigma_sieve(power, n);
    for x in c.iter_mut() {
        *x *= scale;
    }
    c[0] = BigInt::one();
    Ok(QSeries::new(c))
}

/// A normalized level-one Hecke eigenform with exact coefficients a(0..=N).
#[derive(Debug, Clone)]
pub struct Eigenform {
    weight: u32,
    a: Vec<BigInt>,
    lambda: Vec<f64>,
}

impl Eigenform {
    /// Wraps an exact q-expansion. `a[n]` is the coefficient of qⁿ; `a[1]` must be 1.
    pub fn from_coefficients(weight: u32, a: Vec<BigInt>) -> Result<Self> {
        if a.len() < 2 || !a[1].is_one() || !a[0].is_zero() {
            return Err(Error::Precondition("eigenform needs a(0)=0 and a(1)=1".into()));
        }
        let half = f64::from(weight - 1) / 2.0;
        let lambda = a
            .iter()
            .enumerate()
            .map(|(n, x)| {
                if n == 0 {
                    0.0
                } else {
                    x.to_f64().expect("finite coefficient") / (n as f64).powf(half)
                }
            })
            .collect();
        Ok(Self { weight, a, lambda })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Largest n with a known coefficient.
    pub fn max_index(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self, n: usize) -> &BigInt {
        &self.a[n]
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.a
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n]
    }

    /// λ(n) for 0 ≤ n ≤ N with λ(0) = 0.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn require(&self, n: usize) -> Result<()> {
        if n > self.max_index() {
            Err(Error::InsufficientCoefficients { needed: n, available: self.max_index() })
        } else {
            Ok(())
        }
    }
}

/// The eigenform spanning the cusp forms of weight 12 (Δ) or 16 (Δ·E₄), with a(1..=N).
pub fn make_eigenform(weight: u32, n: usize) -> Result<Eigenform> {
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let series = match weight {
        12 => eta_power_qexp(24, n)?,
        16 => &eta_power_qexp(24, n)? * &eisenstein_qexp(4, n + 1)?,
        w => return Err(Error::UnsupportedWeight(w)),
    };
    Eigenform::from_coefficients(weight, series.into_coefficients())
}

/// τ_k(n) for 0 ≤ n ≤ N (τ_k(0) = 0), by iterated Dirichlet convolution with 1.
pub fn divisor_sieve(k: u32, n: usize) -> Result<Vec<u64>> {
    if k < 2 {
        return Err(Error::Precondition(format!("divisor fold must be ≥ 2, got {k}")));
    }
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let mut t = vec![1u64; n + 1];
    t[0] = 0;
    for _ in 1..k {
        let mut next = vec![0u64; n + 1];
        for d in 1..=n {
            let v = t[d];
            let mut m = d;
            while m <= n {
                next[m] += v;
                m += d;
            }
        }
        t = next;
    }
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct HeckeReport {
    pub bound: usize,
    pub pairs_checked: usize,
    pub violations: usize,
    pub first_violation: Option<(usize, usize)>,
}

/// Checks a(m)a(n) = Σ_{d|(m,n)} d^{κ−1} a(mn/d²) exactly for all m, n ≤ M.
pub fn hecke_relation_report(form: &Eigenform, bound: usize) -> Result<HeckeReport> {
    form.require(bound * bound)?;
    let powers: Vec<BigInt> =
        (0..=bound).map(|d| BigInt::from(d).pow(form.weight() - 1)).collect();
    let mut violations = 0;
    let mut first = None;
    let mut checked = 0;
    for m in 1..=bound {
        for n in m..=bound {
            let lhs = form.a(m) * form.a(n);
            let g = m.gcd(&n);
            let mut rhs = BigInt::zero();
            for d in (1..=g).filter(|d| g % d == 0) {
                rhs += &powers[d] * form.a(m * n / (d * d));
            }
            checked += 1;
            if lhs != rhs {
                violations += 1;
                first.get_or_insert((m, n));
            }
        }
    }
    Ok(HeckeReport { bound, pairs_checked: checked, violations, first_violation: first })
}

/// Indices n ≤ N where Deligne's bound |λ(n)| ≤ τ(n) fails.
pub fn deligne_violations(form: &Eigenform, tau: &[u64]) -> Vec<usize> {
    let top = form.max_index().min(tau.len() - 1);
    (1..=top).filter(|&n| form.lambda(n).abs() > tau[n] as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn delta_leading_coefficients() {
        assert_eq!(eta_power_qexp(24, 1).unwrap().coeff(1), &big(1));
        assert_eq!(eta_power_qexp(24, 2).unwrap().coeff(2), &big(-24));
        let d = eta_power_qexp(24, 6).unwrap();
        let expected = [0, 1, -24, 252, -1472, 4830, -6048];
        for (n, v) in expected.iter().enumerate() {
            assert_eq!(d.coeff(n), &big(*v), "a({n})");
        }
    }

    #[test]
    fn eta_power_rejects_bad_input() {
        assert!(matches!(eta_power_qexp(24, 0), Err(Error::EmptySeries)));
        assert!(matches!(eta_power_qexp(3, 5), Err(Error::Precondition(_))));
    }

    #[test]
    fn eisenstein_coefficients() {
        assert_eq!(eisenstein_qexp(4, 1).unwrap().coeff(0), &big(1));
        assert_eq!(eisenstein_qexp(4, 2).unwrap().coeff(1), &big(240));
        assert_eq!(eisenstein_qexp(4, 3).unwrap().coeff(2), &big(2160));
        assert_eq!(eisenstein_qexp(6, 3).unwrap().coeff(2), &big(-504 * 33));
        assert!(matches!(eisenstein_qexp(8, 3), Err(Error::UnsupportedWeight(8))));
    }

    #[test]
    fn weight_sixteen_form() {
        // Δ·E₄ = q + 216q² − 3348q³ + 13888q⁴ + …
        let f = make_eigenform(16, 4).unwrap();
        let expected = [0, 1, 216, -3348, 13888];
        for (n, v) in expected.iter().enumerate() {
            assert_eq!(f.a(n), &big(*v));
        }
        assert_eq!(f.lambda(1), 1.0);
    }

    #[test]
    fn normalized_eigenvalues() {
        let f = make_eigenform(12, 2).unwrap();
        assert_eq!(f.lambda(1), 1.0);
        assert!((f.lambda(2) - (-0.530_330_085_9)).abs() < 1e-10);
    }

    #[test]
    fn divisor_functions() {
        let t2 = divisor_sieve(2, 12).unwrap();
        assert_eq!(t2[1], 1);
        assert_eq!(t2[6], 4);
        assert_eq!(t2[12], 6);
        assert_eq!(divisor_sieve(3, 4).unwrap()[4], 6);
        assert!(divisor_sieve(1, 4).is_err());
    }

    #[test]
    fn hecke_relation_small_cases() {
        let d = make_eigenform(12, 16).unwrap();
        assert_eq!(hecke_relation_report(&d, 1).unwrap().violations, 0);
        assert_eq!(d.a(6), &(d.a(2) * d.a(3)));
        assert_eq!(d.a(2) * d.a(2), d.a(4) + BigInt::from(2048));
        assert_eq!(hecke_relation_report(&d, 4).unwrap().violations, 0);
        assert!(matches!(
            hecke_relation_report(&d, 5),
            Err(Error::InsufficientCoefficients { .. })
        ));
    }

    #[test]
    fn tampered_coefficient_is_caught() {
        let d = make_eigenform(12, 36).unwrap();
        let mut a = d.coefficients().to_vec();
        a[6] += 1;
        let bad = Eigenform::from_coefficients(12, a).unwrap();
        let r = hecke_relation_report(&bad, 6).unwrap();
        assert!(r.violations > 0);
    }

    #[test]
    fn mean_square_is_linear() {
        for k in [12, 16] {
            let form = make_eigenform(k, 100_000).unwrap();
            for x in [1_000usize, 10_000, 100_000] {
                let s: f64 = form.lambdas()[1..=x].iter().map(|l| l * l).sum();
                assert!(s <= 10.0 * x as f64, "k={k} x={x}: {s}");
            }
        }
    }
}
