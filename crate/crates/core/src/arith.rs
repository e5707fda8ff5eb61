//! Multiplicative helpers, Ramanujan sums and Kloosterman sums.

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::sum::pairwise;
use crate::{e_rational, Error, Result};

/// A positive modulus together with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modulus {
    c: u64,
    factors: Vec<(u64, u32)>,
}

impl Modulus {
    pub fn new(c: u64) -> Result<Self> {
        if c == 0 {
            return Err(Error::ZeroModulus);
        }
        Ok(Self { c, factors: factorize(c) })
    }

    pub fn value(&self) -> u64 {
        self.c
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn phi(&self) -> u64 {
        self.factors.iter().fold(1, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
    }

    pub fn moebius(&self) -> i64 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Number of divisors τ(c).
    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| u64::from(e) + 1).product()
    }
}

/// Trial-division factorization; `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Euler's totient. `c` must be positive.
pub fn euler_phi(c: u64) -> u64 {
    assert!(c > 0, "euler_phi(0)");
    Modulus { c, factors: factorize(c) }.phi()
}

pub fn moebius(d: u64) -> i64 {
    assert!(d > 0, "moebius(0)");
    Modulus { c: d, factors: factorize(d) }.moebius()
}

/// r_d(n) = Σ_{e | (d,n)} e·μ(d/e). `r_d(0) = φ(d)`.
pub fn ramanujan_sum(d: u64, n: u64) -> i64 {
    assert!(d > 0, "ramanujan_sum with d = 0");
    let g = d.gcd(&n);
    (1..=g)
        .filter(|e| g % e == 0)
        .map(|e| e as i64 * moebius(d / e))
        .sum()
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: i128, m: u64) -> Option<u64> {
    let m = m as i128;
    let a = a.rem_euclid(m);
    let ext = a.extended_gcd(&m);
    (ext.gcd == 1).then(|| ext.x.rem_euclid(m) as u64)
}

/// Units d ∈ [1, c] with their inverses modulo c, via one batch inversion.
pub fn units_with_inverses(c: u64) -> Vec<(u64, u64)> {
    if c == 1 {
        return vec![(1, 0)];
    }
    let units: Vec<u64> = (1..c).filter(|d| d.gcd(&c) == 1).collect();
    let m = c as u128;
    let mut prefix = Vec::with_capacity(units.len());
    let mut acc = 1u128;
    for &d in &units {
        acc = acc * d as u128 % m;
        prefix.push(acc as u64);
    }
    let mut inv = mod_inverse(acc as i128, c).expect("product of units is a unit") as u128;
    let mut out = vec![(0, 0); units.len()];
    for i in (0..units.len()).rev() {
        let before = if i == 0 { 1 } else { prefix[i - 1] as u128 };
        out[i] = (units[i], (inv * before % m) as u64);
        inv = inv * units[i] as u128 % m;
    }
    out
}

/// Reduced fractions d/c, as pairs (d, c), with d ∈ [1, c] and gcd(d, c) = 1.
pub fn reduced_fractions(c: u64) -> Vec<(u64, u64)> {
    assert!(c > 0, "reduced_fractions(0)");
    if c == 1 {
        return vec![(1, 1)];
    }
    (1..c).filter(|d| d.gcd(&c) == 1).map(|d| (d, c)).collect()
}

const IMAGINARY_TOLERANCE: f64 = 1e-9;

/// S(a, b; c) by direct enumeration over the units modulo c.
///
/// Panics if the imaginary part of the computed sum exceeds 1e−9, which can
/// only come from a broken inverse table.
pub fn kloosterman(a: i128, b: i128, c: u64) -> Result<f64> {
    if c == 0 {
        return Err(Error::ZeroModulus);
    }
    if c == 1 {
        return Ok(1.0);
    }
    let ci = c as i128;
    let (ar, br) = (a.rem_euclid(ci), b.rem_euclid(ci));
    let terms: Vec<Complex64> = units_with_inverses(c)
        .into_iter()
        .map(|(d, dbar)| e_rational(ar * d as i128 + br * dbar as i128, c))
        .collect();
    let re: Vec<f64> = terms.iter().map(|z| z.re).collect();
    let im: Vec<f64> = terms.iter().map(|z| z.im).collect();
    let (re, im) = (pairwise(&re), pairwise(&im));
    assert!(
        im.abs() <= IMAGINARY_TOLERANCE,
        "S({a},{b};{c}) has imaginary part {im}"
    );
    Ok(re)
}

/// τ(c)·gcd(a,b,c)^{1/2}·c^{1/2}.
pub fn weil_bound(a: i128, b: i128, c: u64) -> f64 {
    let g = (a.unsigned_abs() as u64).gcd(&(b.unsigned_abs() as u64)).gcd(&c);
    let tau = Modulus::new(c).expect("positive modulus").tau();
    tau as f64 * (g as f64).sqrt() * (c as f64).sqrt()
}

/// S(r, 1; c) for all r mod c as a single DFT of u_d = e(d̄/c)·[gcd(d,c)=1].
pub fn kloosterman_row(c: u64, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    if c == 1 {
        return vec![1.0];
    }
    let n = c as usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (d, dbar) in units_with_inverses(c) {
        buf[d as usize] = e_rational(dbar as i128, c);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Rows S(r, 1; c) for every c ≤ c_max, serving S(m, n; c) through Selberg's identity
/// S(m, n; c) = Σ_{d | (m,n,c)} d·S(mn/d², 1; c/d).
#[derive(Debug, Clone)]
pub struct KloostermanTable {
    rows: Vec<Vec<f64>>,
}

impl KloostermanTable {
    pub fn new(c_max: u64) -> Self {
        let mut rows: Vec<Vec<f64>> = (1..=c_max)
            .into_par_iter()
            .map_init(FftPlanner::new, |planner, c| kloosterman_row(c, planner))
            .collect();
        rows.insert(0, Vec::new());
        Self { rows }
    }

    pub fn c_max(&self) -> u64 {
        self.rows.len() as u64 - 1
    }

    /// S(m, n; c) for positive m, n and 1 ≤ c ≤ c_max.
    pub fn get(&self, m: u64, n: u64, c: u64) -> f64 {
        let g = m.gcd(&n).gcd(&c);
        let row = |r: u64, c: u64| self.rows[c as usize][(r % c) as usize];
        if g == 1 {
            return row(((m % c) as u128 * (n % c) as u128 % c as u128) as u64, c);
        }
        (1..=g)
            .filter(|d| g % d == 0)
            .map(|d| {
                let cd = c / d;
                let r = ((m / d) % cd) as u128 * ((n / d) % cd) as u128 % cd as u128;
                d as f64 * row(r as u64, cd)
            })
            .sum()
    }
}
