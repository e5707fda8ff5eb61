//! The ℓ² norm of γ★(b, z), the additive convolution of two twisted and
//! localized eigenvalue sequences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::FiniteSequence;
use crate::sum::pairwise;
use crate::{Error, Result};

/// The cut-off w₂ applied to √(2b)z/𝒵.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight2 {
    /// Equal to 1 on [1/20, 20], supported in [1/100, 100], smooth in log y.
    #[default]
    Plateau,
    /// w₂ ≡ 1 (removes the b-support window).
    One,
}

/// C^∞ step rising from 0 at t ≤ 0 to 1 at t ≥ 1.
pub(crate) fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let (a, b) = ((-1.0 / t).exp(), (-1.0 / (1.0 - t)).exp());
        a / (a + b)
    }
}

impl Weight2 {
    pub fn value(self, y: f64) -> f64 {
        match self {
            Weight2::One => 1.0,
            Weight2::Plateau => {
                if y <= 0.0 {
                    return 0.0;
                }
                let l = y.ln();
                let (outer, inner) = (100f64.ln(), 20f64.ln());
                smooth_step((l + outer) / (outer - inner)) * smooth_step((outer - l) / (outer - inner))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaStarParams {
    pub m1: u64,
    pub m2: u64,
    pub z: f64,
    /// (u₁, u₂, u₃).
    #[serde(default)]
    pub u: [f64; 3],
    /// The ± in e^{±iz√mⱼ}.
    #[serde(default = "plus_signs")]
    pub signs: [i8; 2],
    /// 𝒵 in the argument of w₂.
    pub zcal: f64,
    #[serde(default)]
    pub w2: Weight2,
}

fn plus_signs() -> [i8; 2] {
    [1, 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaStarNorm {
    /// Σ_b |γ★(b, z)|².
    pub norm_sq: f64,
    /// (M₂^{1/2} + zM₂)²·M₁.
    pub bound: f64,
    pub ratio: f64,
}

/// λ(m)(m/M)^{−1/4+iu}e^{±iz√m} for M ≤ m ≤ 2M.
fn twisted(lambda: &[f64], big_m: u64, u: f64, sign: i8, z: f64) -> FiniteSequence {
    let values = (big_m..=2 * big_m)
        .map(|m| {
            let r = (m as f64 / big_m as f64).ln();
            let phase = u * r + sign as f64 * z * (m as f64).sqrt();
            lambda[m as usize] * (-0.25 * r).exp() * Complex64::from_polar(1.0, phase)
        })
        .collect();
    FiniteSequence::new(big_m as i64, values)
}

fn check(lambda1: &[f64], lambda2: &[f64], p: &GammaStarParams) -> Result<()> {
    if p.m1 == 0 || p.m2 == 0 {
        return Err(Error::Precondition("M₁ and M₂ must be ≥ 1".into()));
    }
    if !(p.z >= 0.0 && p.z.is_finite()) || !(p.zcal > 0.0 && p.zcal.is_finite()) {
        return Err(Error::Precondition(format!("need z ≥ 0 and 𝒵 > 0, got z={}, 𝒵={}", p.z, p.zcal)));
    }
    if p.u.iter().any(|u| !u.is_finite()) || p.signs.iter().any(|s| s.abs() != 1) {
        return Err(Error::Precondition("u must be finite and signs ±1".into()));
    }
    for (lambda, m) in [(lambda1, p.m1), (lambda2, p.m2)] {
        if 2 * m as usize >= lambda.len() {
            return Err(Error::InsufficientCoefficients {
                needed: 2 * m as usize,
                available: lambda.len().saturating_sub(1),
            });
        }
    }
    Ok(())
}

/// γ★(b, z) for every b in the support of the convolution, as (b, value).
pub fn gamma_star_values(
    lambda1: &[f64],
    lambda2: &[f64],
    p: &GammaStarParams,
) -> Result<Vec<(u64, Complex64)>> {
    check(lambda1, lambda2, p)?;
    let f1 = twisted(lambda1, p.m1, p.u[0], p.signs[0], p.z);
    let f2 = twisted(lambda2, p.m2, p.u[1], p.signs[1], p.z);
    let conv = f1.convolve(&f2);
    let total = (p.m1 + p.m2) as f64;
    Ok(conv
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let b = conv.start as u64 + i as u64;
            let y = (2.0 * b as f64).sqrt() * p.z / p.zcal;
            let w = p.w2.value(y);
            let phase = if w == 0.0 || y == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, -2.0 * p.u[2] * y.ln() + p.u[2] * (b as f64 / total).ln())
            };
            (b, v * phase * w)
        })
        .collect())
}

pub fn gamma_star_norm(lambda1: &[f64], lambda2: &[f64], p: &GammaStarParams) -> Result<GammaStarNorm> {
    let values = gamma_star_values(lambda1, lambda2, p)?;
    let sq: Vec<f64> = values.iter().map(|(_, v)| v.norm_sqr()).collect();
    let norm_sq = pairwise(&sq);
    let (m1, m2) = (p.m1 as f64, p.m2 as f64);
    let bound = (m2.sqrt() + p.z * m2).powi(2) * m1;
    Ok(GammaStarNorm { norm_sq, bound, ratio: norm_sq / bound })
}
