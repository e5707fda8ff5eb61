//! The W★ transform and its oscillatory decomposition.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::{BesselKernel, SmoothWindow};
use crate::quad::{oscillatory, Tolerance};
use crate::{e, Error, Result};

/// i^k.
pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// ∫ W_η(y) J_ν(4π√(yw + z)) dy over the window support, with yw + z ≥ 0 there.
pub(crate) fn bessel_window_integral(
    window: &SmoothWindow,
    nu: f64,
    z: f64,
    w: f64,
    tol: Tolerance,
) -> Result<Complex64> {
    if window.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (a, b) = window.support();
    let lowest = (z + a * w).min(z + b * w);
    if lowest < 0.0 {
        return Err(Error::Precondition(format!("negative Bessel argument: z={z}, w={w}")));
    }
    // Phase 4π√(yw+z) has y-derivative 2πw/√(yw+z); near a zero argument the
    // integrand is smooth in √, so cap the estimate.
    let freq = TAU * w.abs() / lowest.max(w.abs() * 1e-2).sqrt() + TAU * window.eta.abs();
    let kernel = BesselKernel::new(nu);
    oscillatory(a, b, freq, 8, tol, |y| {
        let arg = 4.0 * std::f64::consts::PI * (y * w + z).max(0.0).sqrt();
        window.eval(y) * kernel.eval(arg)
    })
}

pub(crate) const W_STAR_TOLERANCE: Tolerance = Tolerance { abs: 1e-15, rel: 1e-13 };

/// W★(z, w) = 2π i^κ ∫ W_η(y) J_{κ−1}(4π√(yw + z)) dy for z ≥ 4|w| > 0.
pub fn w_star(window: &SmoothWindow, kappa: u32, z: f64, w: f64) -> Result<Complex64> {
    if kappa == 0 {
        return Err(Error::Precondition("weight must be positive".into()));
    }
    if !(z.is_finite() && w.is_finite()) || w == 0.0 || z < 4.0 * w.abs() {
        return Err(Error::Precondition(format!("W★ needs z ≥ 4|w| > 0, got z={z}, w={w}")));
    }
    let integral =
        bessel_window_integral(window, f64::from(kappa - 1), z, w, W_STAR_TOLERANCE)?;
    Ok(i_pow(kappa) * integral * TAU)
}

/// Local fits of samples to W₊(z)z^{−1/4}e(2√z) + W₋(z)z^{−1/4}e(−2√z), with W± cubic
/// in (z − z_c)/√z_c over ±1.5 periods around each grid point z_c.
#[derive(Debug, Clone, Serialize)]
pub struct OscillatoryParts {
    pub z: Vec<f64>,
    pub samples: Vec<Complex64>,
    pub w_plus: Vec<Complex64>,
    pub w_minus: Vec<Complex64>,
    /// ∂W₊/∂z and ∂W₋/∂z from the local fits.
    pub d_plus: Vec<Complex64>,
    pub d_minus: Vec<Complex64>,
    /// Largest |sample − local model| over all fitting windows.
    pub residual: f64,
}

impl OscillatoryParts {
    pub fn sup_sample(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Samples W★(z, w) on `z_grid` and fits the two-term oscillatory model locally.
pub fn extract_oscillatory_parts(
    window: &SmoothWindow,
    kappa: u32,
    w: f64,
    z_grid: &[f64],
) -> Result<OscillatoryParts> {
    check_grid(z_grid)?;
    let samples = z_grid
        .iter()
        .map(|&z| w_star(window, kappa, z, w))
        .collect::<Result<Vec<_>>>()?;
    fit_oscillatory_parts(z_grid, &samples)
}

const POINTS_PER_PERIOD: f64 = 4.0;
const HALF_WIDTH_PERIODS: f64 = 1.5;
const UNKNOWNS: usize = 8;

fn check_grid(z_grid: &[f64]) -> Result<()> {
    if z_grid.len() < 2 * UNKNOWNS {
        return Err(Error::IllConditioned(format!(
            "need at least {} grid points, got {}",
            2 * UNKNOWNS,
            z_grid.len()
        )));
    }
    for pair in z_grid.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if !(a > 0.0 && b > a) {
            return Err(Error::Precondition("z grid must be positive and increasing".into()));
        }
        // e(2√z) has period √z in z.
        if b - a > a.sqrt() / POINTS_PER_PERIOD {
            return Err(Error::IllConditioned(format!(
                "grid step {} at z={a} is coarser than {POINTS_PER_PERIOD} points per period",
                b - a
            )));
        }
    }
    Ok(())
}

/// Fits `samples` at `z_grid`; exposed separately so synthetic inputs can be tested.
pub fn fit_oscillatory_parts(z_grid: &[f64], samples: &[Complex64]) -> Result<OscillatoryParts> {
    check_grid(z_grid)?;
    assert_eq!(z_grid.len(), samples.len());
    let basis = |z: f64, zc: f64| -> [Complex64; UNKNOWNS] {
        let t = (z - zc) / zc.sqrt();
        let amp = z.powf(-0.25);
        let plus = e(2.0 * z.sqrt()) * amp;
        let minus = plus.conj();
        let (t2, t3) = (t * t, t * t * t);
        [plus, plus * t, plus * t2, plus * t3, minus, minus * t, minus * t2, minus * t3]
    };
    let n = z_grid.len();
    let mut out = OscillatoryParts {
        z: z_grid.to_vec(),
        samples: samples.to_vec(),
        w_plus: Vec::with_capacity(n),
        w_minus: Vec::with_capacity(n),
        d_plus: Vec::with_capacity(n),
        d_minus: Vec::with_capacity(n),
        residual: 0.0,
    };
    for &zc in z_grid {
        // Windows that would overhang the grid are shifted inwards, keeping their width.
        let half = HALF_WIDTH_PERIODS * zc.sqrt();
        let (first, last) = (z_grid[0], z_grid[n - 1]);
        let lo = (zc - half).max(first).min((last - 2.0 * half).max(first));
        let hi = lo + 2.0 * half;
        let idx: Vec<usize> = (0..n).filter(|&j| z_grid[j] >= lo && z_grid[j] <= hi).collect();
        if idx.len() < UNKNOWNS + 2 {
            return Err(Error::IllConditioned(format!(
                "only {} points in the fitting window at z={zc}",
                idx.len()
            )));
        }
        let rows: Vec<[Complex64; UNKNOWNS]> = idx.iter().map(|&j| basis(z_grid[j], zc)).collect();
        let rhs: Vec<Complex64> = idx.iter().map(|&j| samples[j]).collect();
        let coef = least_squares(&rows, &rhs)?;
        for (row, y) in rows.iter().zip(&rhs) {
            let model: Complex64 = row.iter().zip(&coef).map(|(b, c)| b * c).sum();
            out.residual = out.residual.max((model - y).norm());
        }
        let s = zc.sqrt();
        out.w_plus.push(coef[0]);
        out.d_plus.push(coef[1] / s);
        out.w_minus.push(coef[4]);
        out.d_minus.push(coef[5] / s);
    }
    Ok(out)
}

/// Least squares by modified Gram–Schmidt QR with a conditioning check on R.
fn least_squares(rows: &[[Complex64; UNKNOWNS]], rhs: &[Complex64]) -> Result<[Complex64; UNKNOWNS]> {
    let m = rows.len();
    let mut q: Vec<Vec<Complex64>> = (0..UNKNOWNS).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
    let mut r = [[Complex64::new(0.0, 0.0); UNKNOWNS]; UNKNOWNS];
    for k in 0..UNKNOWNS {
        let norm = q[k].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        r[k][k] = Complex64::new(norm, 0.0);
        if norm == 0.0 {
            return Err(Error::IllConditioned("rank-deficient oscillatory fit".into()));
        }
        for v in q[k].iter_mut() {
            *v /= norm;
        }
        for j in k + 1..UNKNOWNS {
            let dot: Complex64 = (0..m).map(|i| q[k][i].conj() * q[j][i]).sum();
            r[k][j] = dot;
            for i in 0..m {
                let qk = q[k][i];
                q[j][i] -= dot * qk;
            }
        }
    }
    let diag: Vec<f64> = (0..UNKNOWNS).map(|k| r[k][k].re).collect();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &d| (l.min(d), h.max(d)));
    if lo < 1e-10 * hi {
        return Err(Error::IllConditioned(format!("oscillatory fit pivot ratio {}", lo / hi)));
    }
    let mut x = [Complex64::new(0.0, 0.0); UNKNOWNS];
    for k in (0..UNKNOWNS).rev() {
        let mut acc: Complex64 = (0..m).map(|i| q[k][i].conj() * rhs[i]).sum();
        for j in k + 1..UNKNOWNS {
            acc -= r[k][j] * x[j];
        }
        x[k] = acc / r[k][k];
    }
    Ok(x)
}
