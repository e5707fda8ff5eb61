//! E(n) = Σ_h λ₁(n+h)λ₂(n−h)W(h/H) computed directly and through the circle method.

use serde::{Deserialize, Serialize};

use super::gamma_star::smooth_step;
use super::shift_weights;
use crate::circle::{build_cover, detect_additive, FiniteSequence};
use crate::sum::pairwise;
use crate::windows::bump_window;
use crate::{Error, Result};

/// V(x): 1 on [0, 2], falling smoothly to 0 on [−1/2, 0] and [2, 5/2].
///
/// V must equal 1 at every (n − m₂)/H′ = h/H′ with h ∈ supp W(·/H) for the
/// localization to be redundant; with H ≤ H′ these points lie in (0, 2].
pub fn plateau_v(x: f64) -> f64 {
    smooth_step(2.0 * (x + 0.5)) * smooth_step(2.0 * (2.5 - x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineParams {
    pub n: u64,
    pub h: f64,
    pub h_prime: f64,
    pub q: u64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub e_direct: f64,
    pub e_reconstructed_re: f64,
    pub e_reconstructed_im: f64,
    pub abs_error: f64,
    /// |E_direct − E_reconstructed| / (1 + |E_direct|).
    pub relative_error: f64,
    /// (Σ|f|)(Σ|g|)·Q/(δ^{1/2}Λ), the Cauchy–Schwarz error scale at this Q.
    pub heuristic: f64,
    pub lambda: f64,
}

pub fn pipeline_fidelity(lambda1: &[f64], lambda2: &[f64], p: &PipelineParams) -> Result<PipelineResult> {
    if p.q < 10 {
        return Err(Error::Precondition(format!("Q must be ≥ 10, got {}", p.q)));
    }
    if !(p.h > 0.0 && p.h_prime >= p.h) {
        return Err(Error::Precondition(format!("need 0 < H ≤ H′, got H={}, H′={}", p.h, p.h_prime)));
    }
    let n = p.n as i64;
    let g_lo = (n as f64 - 2.5 * p.h_prime).floor() as i64 + 1;
    let g_hi = (n as f64 + 0.5 * p.h_prime).ceil() as i64 - 1;
    if g_lo < 1 {
        return Err(Error::Precondition(format!("n − 5H′/2 must be ≥ 1, got {}", g_lo - 1)));
    }
    let window = bump_window();
    let shifts = shift_weights(&window, p.h);
    let f_hi = shifts.last().map_or(n, |s| n + s.0);
    for (lambda, needed) in [(lambda1, f_hi), (lambda2, g_hi)] {
        if needed as usize >= lambda.len() {
            return Err(Error::InsufficientCoefficients {
                needed: needed as usize,
                available: lambda.len().saturating_sub(1),
            });
        }
    }

    let direct: Vec<f64> = shifts
        .iter()
        .map(|&(h, w)| lambda1[(n + h) as usize] * lambda2[(n - h) as usize] * w)
        .collect();
    let e_direct = pairwise(&direct);

    let f_start = shifts.first().map_or(n + 1, |s| n + s.0);
    let f_values: Vec<f64> = shifts.iter().map(|&(h, w)| lambda1[(n + h) as usize] * w).collect();
    let g_values: Vec<f64> = (g_lo..=g_hi)
        .map(|m| lambda2[m as usize] * plateau_v((n - m) as f64 / p.h_prime))
        .collect();
    let f = FiniteSequence::from_real(f_start, &f_values);
    let g = FiniteSequence::from_real(g_lo, &g_values);

    let cover = build_cover(|x| window.value(x), p.q, p.delta)?;
    let rec = detect_additive(&cover, &f, &g, n);
    let abs_error = (rec - e_direct).norm();
    let l1 = |v: &[f64]| pairwise(&v.iter().map(|x| x.abs()).collect::<Vec<_>>());
    let heuristic =
        l1(&f_values) * l1(&g_values) * p.q as f64 / (cover.delta().sqrt() * cover.lambda());
    Ok(PipelineResult {
        e_direct,
        e_reconstructed_re: rec.re,
        e_reconstructed_im: rec.im,
        abs_error,
        relative_error: abs_error / (1.0 + e_direct.abs()),
        heuristic,
        lambda: cover.lambda(),
    })
}
