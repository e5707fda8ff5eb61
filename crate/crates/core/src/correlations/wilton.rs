//! sup_α |Σ_{n≤x} λ(n)e(nα)| on an FFT grid.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WiltonSup {
    pub x: usize,
    pub sup: f64,
    pub alpha: f64,
    pub grid_len: usize,
}

/// Evaluates S(α) = Σ_{n≤x} λ(n)e(nα) at α = j/L, L the next power of two
/// ≥ grid_factor·x, and returns the largest |S| (first maximiser on ties).
/// `lambda[n]` is λ(n); index 0 is ignored.
pub fn wilton_sup(lambda: &[f64], x: usize, grid_factor: usize) -> Result<WiltonSup> {
    if grid_factor < 4 {
        return Err(Error::Precondition(format!("grid_factor must be ≥ 4, got {grid_factor}")));
    }
    if x == 0 {
        return Err(Error::Precondition("x must be ≥ 1".into()));
    }
    if x >= lambda.len() {
        return Err(Error::InsufficientCoefficients { needed: x, available: lambda.len().saturating_sub(1) });
    }
    let len = (grid_factor * x).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for n in 1..=x {
        buf[n] = Complex64::new(lambda[n], 0.0);
    }
    // The unnormalised inverse transform is Σ_n v[n]e(jn/L).
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    let (j, sup) = buf
        .iter()
        .map(|v| v.norm())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (j, s)| if s > best.1 { (j, s) } else { best });
    Ok(WiltonSup { x, sup, alpha: j as f64 / len as f64, grid_len: len })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::make_eigenform;
    use crate::e;
    use crate::sum::pairwise;

    fn direct(lambda: &[f64], x: usize, alpha: f64) -> Complex64 {
        (1..=x).map(|n| lambda[n] * e((n as f64 * alpha).fract())).sum()
    }

    #[test]
    fn single_term() {
        let form = make_eigenform(12, 4).unwrap();
        let w = wilton_sup(form.lambdas(), 1, 4).unwrap();
        assert!((w.sup - 1.0).abs() < 1e-15);
        assert_eq!(w.grid_len, 4);
    }

    #[test]
    fn dc_bin_and_direct_evaluation() {
        let form = make_eigenform(12, 1 << 14).unwrap();
        let lam = form.lambdas();
        let x: usize = 1000;
        let len = (4 * x).next_power_of_two();
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for n in 1..=x {
            buf[n] = lam[n].into();
        }
        FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
        let dc = pairwise(&lam[1..=x]);
        assert!((buf[0].re - dc).abs() < 1e-10 * dc.abs().max(1.0));

        let x = 1 << 14;
        let w = wilton_sup(lam, x, 4).unwrap();
        let d = direct(lam, x, w.alpha).norm();
        assert!((w.sup - d).abs() < 1e-8 * w.sup, "{} vs {d}", w.sup);
    }

    #[test]
    fn contract() {
        let form = make_eigenform(12, 10).unwrap();
        assert!(wilton_sup(form.lambdas(), 5, 3).is_err());
        assert!(matches!(
            wilton_sup(form.lambdas(), 11, 4),
            Err(Error::InsufficientCoefficients { .. })
        ));
    }
}
