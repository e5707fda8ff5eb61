//! Jutila's approximation Ĩ(α) of the unit interval by Farey arcs.
//!
//! δ is snapped to a dyadic D/2⁶⁰ so that every arc endpoint k + d/c ± δ is an
//! exact rational; the L² sweep orders endpoints with exact i128 comparisons.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{euler_phi, reduced_fractions};
use crate::quad::gl16;
use crate::sum::{pairwise, pairwise_complex, Compensated};
use crate::{e, e_rational, Error, Result};

const DYADIC_BITS: u32 = 60;
const ONE: i128 = 1 << DYADIC_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub d: u64,
    pub c: u64,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FareyCover {
    q: u64,
    delta_num: u64,
    lambda: f64,
    /// (c, w(c)) for every c ∈ [Q, 2Q] with w(c) > 0.
    moduli: Vec<(u64, f64)>,
    /// Arcs sorted by their centre d/c.
    arcs: Vec<Arc>,
}

/// δ → D with δ ≈ D/2⁶⁰.
pub fn snap_delta(delta: f64) -> u64 {
    (delta * ONE as f64).round() as u64
}

/// Enumerates arcs around d/c, c ∈ [Q, 2Q], weighted by w(c) = w0(c/Q).
pub fn build_cover(w0: impl Fn(f64) -> f64, q: u64, delta: f64) -> Result<FareyCover> {
    if q == 0 {
        return Err(Error::Precondition("Q must be ≥ 1".into()));
    }
    let qf = q as f64;
    let slack = 1e-12;
    if !(delta >= (1.0 - slack) / (qf * qf) && delta <= (1.0 + slack) / qf) {
        return Err(Error::Precondition(format!("need Q⁻² ≤ δ ≤ Q⁻¹, got Q={q}, δ={delta}")));
    }
    let delta_num = snap_delta(delta);
    let mut moduli = Vec::new();
    for c in q..=2 * q {
        let w = w0(c as f64 / qf);
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Precondition(format!("w({c}) = {w} is outside [0, 1]")));
        }
        if w > 0.0 {
            moduli.push((c, w));
        }
    }
    if moduli.is_empty() {
        return Err(Error::EmptyCover);
    }
    let terms: Vec<f64> = moduli.iter().map(|&(c, w)| w * euler_phi(c) as f64).collect();
    let lambda = pairwise(&terms);
    let mut arcs: Vec<Arc> = moduli
        .iter()
        .flat_map(|&(c, w)| reduced_fractions(c).into_iter().map(move |(d, _)| Arc { d, c, weight: w }))
        .collect();
    arcs.sort_by(|a, b| (a.d as u128 * b.c as u128).cmp(&(b.d as u128 * a.c as u128)));
    Ok(FareyCover { q, delta_num, lambda, moduli, arcs })
}

impl FareyCover {
    pub fn q(&self) -> u64 {
        self.q
    }

    /// The snapped half-width D/2⁶⁰.
    pub fn delta(&self) -> f64 {
        self.delta_num as f64 / ONE as f64
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn moduli(&self) -> &[(u64, f64)] {
        &self.moduli
    }

    pub fn interval_count(&self) -> usize {
        self.arcs.len()
    }

    fn height(&self) -> f64 {
        1.0 / (2.0 * self.delta() * self.lambda)
    }

    /// The Lemma 2.2 majorant Q²/(δΛ²), with ε = 0 and implied constant 1.
    pub fn l2_bound(&self) -> f64 {
        let q = self.q as f64;
        q * q / (self.delta() * self.lambda * self.lambda)
    }
}

/// Ĩ(α), 1-periodic, with arcs taken half-open [d/c − δ, d/c + δ) so that Ĩ is
/// right-continuous at every endpoint.
pub fn itilde_eval(cover: &FareyCover, alpha: f64) -> f64 {
    let beta = alpha.rem_euclid(1.0);
    let b = ((beta * ONE as f64).round() as i128).min(ONE - 1);
    let dn = cover.delta_num as i128;
    let dfl = cover.delta();
    let mut total = Compensated::default();
    for shift in -1i128..=1 {
        // Arcs with centre in (β − shift − 2δ, β − shift + 2δ) are candidates.
        let centre = beta - shift as f64;
        let lo = cover.arcs.partition_point(|a| (a.d as f64 / a.c as f64) < centre - 2.0 * dfl);
        for arc in cover.arcs[lo..].iter() {
            if arc.d as f64 / arc.c as f64 > centre + 2.0 * dfl {
                break;
            }
            // lo ≤ β < hi with lo = shift + d/c − δ, scaled by c·2⁶⁰.
            let c = arc.c as i128;
            let pos = (shift * c + arc.d as i128) * ONE;
            let bc = b * c;
            if pos - dn * c <= bc && bc < pos + dn * c {
                total.add(arc.weight);
            }
        }
    }
    total.value() * cover.height()
}

/// An arc endpoint k + d/c + σδ; σ = 0 marks the fixed points 0 and 1.
#[derive(Debug, Clone, Copy)]
struct Point {
    k: i64,
    d: u64,
    c: u64,
    sigma: i8,
}

impl Point {
    /// (self − other) · c₁c₂·2⁶⁰ as an exact integer.
    fn diff_scaled(&self, other: &Point, dn: i128) -> i128 {
        let (c1, c2) = (self.c as i128, other.c as i128);
        let rational = (self.k - other.k) as i128 * c1 * c2 + self.d as i128 * c2 - other.d as i128 * c1;
        rational * ONE + (self.sigma - other.sigma) as i128 * dn * c1 * c2
    }

    fn cmp(&self, other: &Point, dn: i128) -> Ordering {
        self.diff_scaled(other, dn).cmp(&0)
    }

    fn length_to(&self, next: &Point, dn: i128) -> f64 {
        let num = next.diff_scaled(self, dn);
        num as f64 / (self.c as f64 * next.c as f64 * ONE as f64)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepResult {
    /// ∫₀¹ |1 − Ĩ|².
    pub l2_error: f64,
    /// ∫₀¹ Ĩ.
    pub mass: f64,
}

/// ∫₀¹|1 − Ĩ|² and ∫₀¹Ĩ by an exact sweep over all arc endpoints.
pub fn sweep(cover: &FareyCover) -> SweepResult {
    let dn = cover.delta_num as i128;
    let delta = cover.delta();
    let mut events: Vec<(Point, f64)> = Vec::with_capacity(2 * cover.arcs.len() + 2);
    for arc in &cover.arcs {
        let centre = arc.d as f64 / arc.c as f64;
        for k in -1i64..=1 {
            let (lo, hi) = (k as f64 + centre - delta, k as f64 + centre + delta);
            // Coarse filter; exact clipping happens at the fixed points 0 and 1.
            if hi < -1e-9 || lo > 1.0 + 1e-9 {
                continue;
            }
            events.push((Point { k, d: arc.d, c: arc.c, sigma: -1 }, arc.weight));
            events.push((Point { k, d: arc.d, c: arc.c, sigma: 1 }, -arc.weight));
        }
    }
    let zero = Point { k: 0, d: 0, c: 1, sigma: 0 };
    let one = Point { k: 1, d: 0, c: 1, sigma: 0 };
    events.push((zero, 0.0));
    events.push((one, 0.0));
    events.sort_by(|a, b| a.0.cmp(&b.0, dn));

    let height = cover.height();
    let mut active = Compensated::default();
    let mut err = Compensated::default();
    let mut mass = Compensated::default();
    let mut inside = false;
    for i in 0..events.len() {
        let (p, dw) = events[i];
        if p.sigma == 0 {
            inside = p.k == 0;
        }
        active.add(dw);
        if inside {
            if let Some((next, _)) = events.get(i + 1) {
                let len = p.length_to(next, dn);
                if len > 0.0 {
                    let v = active.value() * height;
                    err.add((1.0 - v) * (1.0 - v) * len);
                    mass.add(v * len);
                }
            }
        }
    }
    SweepResult { l2_error: err.value(), mass: mass.value() }
}

pub fn l2_error(cover: &FareyCover) -> f64 {
    sweep(cover).l2_error
}

/// A finitely supported sequence m ↦ values[m − start].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSequence {
    pub start: i64,
    pub values: Vec<Complex64>,
}

impl FiniteSequence {
    pub fn new(start: i64, values: Vec<Complex64>) -> Self {
        Self { start, values }
    }

    pub fn from_real(start: i64, values: &[f64]) -> Self {
        Self { start, values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }

    pub fn get(&self, m: i64) -> Complex64 {
        let i = m - self.start;
        if i < 0 || i as usize >= self.values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }

    /// Σ_m f(m) e(mα), by Horner's rule in e(α).
    pub fn twisted_sum(&self, alpha: f64) -> Complex64 {
        let z = e(alpha);
        let mut acc = Complex64::new(0.0, 0.0);
        for v in self.values.iter().rev() {
            acc = acc * z + v;
        }
        acc * e(self.start as f64 * alpha)
    }

    pub fn norm_sqr(&self) -> f64 {
        let parts: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        pairwise(&parts)
    }

    /// The additive convolution h(k) = Σ_{m₁+m₂=k} f(m₁)g(m₂).
    pub fn convolve(&self, other: &FiniteSequence) -> FiniteSequence {
        if self.values.is_empty() || other.values.is_empty() {
            return FiniteSequence::new(self.start + other.start, Vec::new());
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len() + other.values.len() - 1];
        for (i, a) in self.values.iter().enumerate() {
            for (j, b) in other.values.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        FiniteSequence::new(self.start + other.start, out)
    }
}

/// Σ_{m₁+m₂=2n} f(m₁)g(m₂).
pub fn exact_additive(f: &FiniteSequence, g: &FiniteSequence, n: i64) -> Complex64 {
    let terms: Vec<Complex64> = (0..f.values.len())
        .map(|i| {
            let m1 = f.start + i as i64;
            f.values[i] * g.get(2 * n - m1)
        })
        .collect();
    pairwise_complex(&terms)
}

/// ∫ Ĩ(α) F(α)G(α) e(−2nα) dα with F, G the twisted sums of f and g: the circle-method
/// approximation of Σ_{m₁+m₂=2n} f(m₁)g(m₂). Each arc is integrated by 16-point
/// Gauss–Legendre in η = α − d/c.
pub fn detect_additive(cover: &FareyCover, f: &FiniteSequence, g: &FiniteSequence, n: i64) -> Complex64 {
    let rule = gl16();
    let delta = cover.delta();
    let per_modulus: Vec<Complex64> = cover
        .moduli
        .par_iter()
        .map(|&(c, w)| {
            let arcs: Vec<Complex64> = reduced_fractions(c)
                .into_iter()
                .map(|(d, _)| {
                    let centre = d as f64 / c as f64;
                    let twist = e_rational(-2 * n as i128 * d as i128, c);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                        let eta = delta * x;
                        let alpha = centre + eta;
                        let val = f.twisted_sum(alpha) * g.twisted_sum(alpha) * e(-2.0 * n as f64 * eta);
                        acc += val * (wt * delta);
                    }
                    acc * twist
                })
                .collect();
            pairwise_complex(&arcs) * w
        })
        .collect();
    pairwise_complex(&per_modulus) * cover.height()
}

/// Cauchy–Schwarz majorant ‖1 − Ĩ‖₂·‖F·G‖₂ for |detect_additive − exact_additive|.
pub fn cauchy_schwarz_bound(l2_error: f64, f: &FiniteSequence, g: &FiniteSequence) -> f64 {
    l2_error.sqrt() * f.convolve(g).norm_sqr().sqrt()
}

/// Row of the `circle` CLI table.
#[derive(Debug, Clone, Serialize)]
pub struct CircleSummary {
    pub q: u64,
    pub delta: f64,
    pub lambda: f64,
    pub intervals: usize,
    pub l2_error: f64,
    pub bound_ratio: f64,
}

pub fn summarize(cover: &FareyCover) -> CircleSummary {
    let l2 = l2_error(cover);
    CircleSummary {
        q: cover.q(),
        delta: cover.delta(),
        lambda: cover.lambda(),
        intervals: cover.interval_count(),
        l2_error: l2,
        bound_ratio: l2 / cover.l2_bound(),
    }
}
