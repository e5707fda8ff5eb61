//! The Petersson formula on level-one spaces of dimension at most one, and the
//! holomorphic large sieve built from it.
//!
//! With the convention
//!
//! P_k(m, n) = δ_{mn} + 2π i^{−k} Σ_{c ≥ 1} S(m, n; c)/c · J_{k−1}(4π√(mn)/c),
//!
//! the spectral side is c_k·λ(m)λ(n) when the weight-k space is spanned by one
//! eigenform, and zero when the space is empty (k = 14). Every check here is a
//! ratio or a zero test, so c_k (which involves ⟨f, f⟩) is never needed.

use std::f64::consts::PI;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{kloosterman, KloostermanTable};
use crate::coeffs::Eigenform;
use crate::sum::pairwise;
use crate::windows::BesselKernel;
use crate::{Error, Result};

/// Level-one weights whose cusp space has dimension exactly one.
pub const DIMENSION_ONE_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

/// Target for the truncation error of every Gram entry in the large sieve.
const SIEVE_TAIL_TARGET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeterssonValue {
    pub k: u32,
    pub m: u64,
    pub n: u64,
    pub c_max: u64,
    pub value: f64,
    pub tail_bound: f64,
}

fn check_weight(k: u32) -> Result<()> {
    if k < 12 || k % 2 == 1 {
        return Err(Error::Precondition(format!("weight must be even and ≥ 12, got {k}")));
    }
    Ok(())
}

fn check_indices(m: u64, n: u64) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Precondition("m and n must be positive".into()));
    }
    Ok(())
}

/// (−1)^{k/2} = i^{−k} for even k.
fn i_pow_neg(k: u32) -> f64 {
    if (k / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Upper bound for |2π Σ_{c > c_max} S(m,n;c)/c · J_{k−1}(4π√(mn)/c)|.
///
/// Uses |S(m,n;c)| ≤ τ(c)√((m,n,c))√c with τ(c) ≤ 2√c, the majorant
/// |J_ν(x)| ≤ (x/2)^ν/Γ(ν+1), and Σ_{c>C} c^{−ν} ≤ C^{1−ν}/(ν−1).
pub fn tail_bound(k: u32, m: u64, n: u64, c_max: u64) -> f64 {
    log_tail_bound(k, m, n, c_max as f64).exp()
}

fn log_tail_bound(k: u32, m: u64, n: u64, c: f64) -> f64 {
    let nu = k as f64 - 1.0;
    let g = m.gcd(&n) as f64;
    let half_x = 2.0 * PI * ((m as f64) * (n as f64)).sqrt();
    (4.0 * PI).ln() + 0.5 * g.ln() + nu * half_x.ln() - libm::lgamma(nu + 1.0) + (1.0 - nu) * c.ln()
        - (nu - 1.0).ln()
}

/// Smallest c_max whose [`tail_bound`] at (k, m, n) is below `target`.
pub fn required_c_max(k: u32, m: u64, n: u64, target: f64) -> u64 {
    let nu = k as f64 - 1.0;
    let at_one = log_tail_bound(k, m, n, 1.0);
    let log_c = (at_one - target.ln()) / (nu - 1.0);
    let mut c = log_c.exp().ceil().max(1.0) as u64;
    while tail_bound(k, m, n, c) >= target {
        c += 1;
    }
    c
}

fn assemble(k: u32, m: u64, n: u64, c_max: u64, terms: &[f64]) -> PeterssonValue {
    let delta = if m == n { 1.0 } else { 0.0 };
    PeterssonValue {
        k,
        m,
        n,
        c_max,
        value: delta + 2.0 * PI * i_pow_neg(k) * pairwise(terms),
        tail_bound: tail_bound(k, m, n, c_max),
    }
}

/// P_k(m, n) truncated at c_max, with each Kloosterman sum evaluated directly.
pub fn petersson_geometric(k: u32, m: u64, n: u64, c_max: u64) -> Result<PeterssonValue> {
    check_weight(k)?;
    check_indices(m, n)?;
    if c_max == 0 {
        return Err(Error::Precondition("c_max must be ≥ 1".into()));
    }
    let bessel = BesselKernel::new(k as f64 - 1.0);
    let x0 = 4.0 * PI * ((m as f64) * (n as f64)).sqrt();
    let terms = (1..=c_max)
        .into_par_iter()
        .map(|c| {
            let s = kloosterman(m as i128, n as i128, c)?;
            Ok(s / c as f64 * bessel.eval(x0 / c as f64))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(assemble(k, m, n, c_max, &terms))
}

/// Repeated Petersson evaluations sharing one Kloosterman table.
#[derive(Debug, Clone)]
pub struct Petersson {
    table: KloostermanTable,
}

impl Petersson {
    pub fn new(c_max: u64) -> Result<Self> {
        if c_max == 0 {
            return Err(Error::Precondition("c_max must be ≥ 1".into()));
        }
        Ok(Self { table: KloostermanTable::new(c_max) })
    }

    pub fn c_max(&self) -> u64 {
        self.table.c_max()
    }

    pub fn value(&self, k: u32, m: u64, n: u64) -> Result<PeterssonValue> {
        check_weight(k)?;
        check_indices(m, n)?;
        let bessel = BesselKernel::new(k as f64 - 1.0);
        let x0 = 4.0 * PI * ((m as f64) * (n as f64)).sqrt();
        let terms: Vec<f64> = (1..=self.c_max())
            .map(|c| self.table.get(m, n, c) / c as f64 * bessel.eval(x0 / c as f64))
            .collect();
        Ok(assemble(k, m, n, self.c_max(), &terms))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioResiduals {
    pub r1: f64,
    pub r2: f64,
}

/// Norm-free consistency of P_k with the q-expansion of the unique eigenform:
/// r₁ = |P(m,n)P(1,1) − P(m,1)P(n,1)| and r₂ = |P(m,n)/P(1,1) − λ(m)λ(n)|.
pub fn petersson_ratio_check(
    engine: &Petersson,
    form: &Eigenform,
    m: u64,
    n: u64,
) -> Result<RatioResiduals> {
    let k = form.weight();
    if k != 12 && k != 16 {
        return Err(Error::UnsupportedWeight(k));
    }
    form.require(m.max(n) as usize)?;
    let p = |a, b| engine.value(k, a, b).map(|v| v.value);
    let p11 = p(1, 1)?;
    assert!(p11.abs() > 1e-6, "P(1,1) = {p11} vanishes on a one-dimensional space");
    let pmn = p(m, n)?;
    let r1 = (pmn * p11 - p(m, 1)? * p(n, 1)?).abs();
    let r2 = (pmn / p11 - form.lambda(m as usize) * form.lambda(n as usize)).abs();
    Ok(RatioResiduals { r1, r2 })
}

/// Γ(k)√(mm′)Σ_f ρ_f(m)ρ̄_f(m′) = (k−1)/(4π)·P_k(m, m′) for an orthonormal basis
/// with Fourier coefficients ρ_f(n)(4πn)^{k/2}.
pub fn sieve_normalization(k: u32) -> f64 {
    (k as f64 - 1.0) / (4.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SieveRatio {
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// The Gram matrix G(m, m′) = Σ_k (k−1)/(4π)·P_k(m, m′) over dimension-one
/// weights k ≤ k_max, for m, m′ ∈ [M, 2M].
#[derive(Debug, Clone)]
pub struct LargeSieve {
    k_max: u32,
    m0: u64,
    weights: Vec<u32>,
    c_max: u64,
    gram: Vec<f64>,
}

impl LargeSieve {
    /// With `c_max = None` the truncation is chosen so that every entry's tail
    /// bound is below 1e-12.
    pub fn new(k_max: u32, m0: u64, c_max: Option<u64>) -> Result<Self> {
        if k_max > 26 {
            return Err(Error::Precondition(format!(
                "k_max = {k_max} exceeds 26; higher weights have dimension > 1"
            )));
        }
        if m0 == 0 {
            return Err(Error::Precondition("M must be ≥ 1".into()));
        }
        let weights: Vec<u32> =
            DIMENSION_ONE_WEIGHTS.iter().copied().filter(|&k| k <= k_max).collect();
        let len = (m0 + 1) as usize;
        let c_max = match (c_max, weights.first()) {
            (Some(c), _) => c.max(1),
            (None, Some(&k)) => required_c_max(k, 2 * m0, 2 * m0, SIEVE_TAIL_TARGET),
            (None, None) => 1,
        };
        let mut gram = vec![0.0; len * len];
        if !weights.is_empty() {
            let engine = Petersson::new(c_max)?;
            let pairs: Vec<(usize, usize)> =
                (0..len).flat_map(|i| (i..len).map(move |j| (i, j))).collect();
            let entries = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let (m, n) = (m0 + i as u64, m0 + j as u64);
                    let per_weight = weights
                        .iter()
                        .map(|&k| Ok(sieve_normalization(k) * engine.value(k, m, n)?.value))
                        .collect::<Result<Vec<f64>>>()?;
                    Ok(pairwise(&per_weight))
                })
                .collect::<Result<Vec<f64>>>()?;
            for (&(i, j), g) in pairs.iter().zip(entries) {
                gram[i * len + j] = g;
                gram[j * len + i] = g;
            }
        }
        Ok(Self { k_max, m0, weights, c_max, gram })
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn c_max(&self) -> u64 {
        self.c_max
    }

    pub fn len(&self) -> usize {
        (self.m0 + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entry(&self, m: u64, n: u64) -> f64 {
        let len = self.len();
        self.gram[(m - self.m0) as usize * len + (n - self.m0) as usize]
    }

    /// Σ_{m,m′} a_m a_{m′} G(m, m′) for a vector indexed by m − M.
    pub fn quadratic_form(&self, a: &[f64]) -> Result<f64> {
        let len = self.len();
        if a.len() != len {
            return Err(Error::Precondition(format!(
                "coefficient vector has length {}, expected {len} for [M, 2M]",
                a.len()
            )));
        }
        let rows: Vec<f64> = (0..len)
            .map(|i| {
                let row: Vec<f64> = (0..len).map(|j| self.gram[i * len + j] * a[j]).collect();
                a[i] * pairwise(&row)
            })
            .collect();
        Ok(pairwise(&rows))
    }

    pub fn ratio(&self, a: &[f64]) -> Result<SieveRatio> {
        let lhs = self.quadratic_form(a)?;
        let norm: Vec<f64> = a.iter().map(|x| x * x).collect();
        let k = self.k_max as f64;
        let bound = (k * k + self.m0 as f64) * pairwise(&norm);
        let ratio = if bound == 0.0 { 0.0 } else { lhs / bound };
        Ok(SieveRatio { lhs, bound, ratio })
    }
}

/// Measured left side of the holomorphic large sieve over dimension-one weights
/// k ≤ k_max, divided by (k_max² + M)·Σ|a_m|².
pub fn large_sieve_ratio(k_max: u32, m0: u64, a: &[f64]) -> Result<SieveRatio> {
    LargeSieve::new(k_max, m0, None)?.ratio(a)
}
