//! The shifted divisor correlation against its main term
//! H·Ŵ(1)·Σ_n a(n) Σ_{d ≤ D} r_d(2n)/d² · (log n + 2γ − 2 log d)².

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{sequence_values, shift_weights, shifted_sum, ExperimentConfig, SequenceSpec};
use crate::arith::moebius;
use crate::coeffs::{divisor_sieve, make_eigenform};
use crate::sum::pairwise;
use crate::windows::mellin_at;
use crate::{Error, Result};

/// The Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivisorMainTerm {
    pub exact_lhs: f64,
    pub main_term: f64,
    pub relative_deviation: f64,
    /// |main(D) − main(⌊D/2⌋)|, the self-convergence estimate of the d-tail.
    pub tail_estimate: f64,
    pub d_max: u64,
}

fn sequence(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let lambda3 = match cfg.sequence {
        SequenceSpec::Lambda3 => make_eigenform(cfg.weights[2], 2 * cfg.x as usize)?.lambdas().to_vec(),
        _ => Vec::new(),
    };
    sequence_values(cfg.sequence, cfg.x, &lambda3)
}

/// The main term truncated at d ≤ d_max, without certification.
///
/// With r_d(m) = Σ_{e | (d, m)} e·μ(d/e), the d-sum becomes
/// Σ_{e | 2n, e ≤ D} e·G(e) where G(e) = Σ_{j ≤ D/e} μ(j) f(ej), so each of the
/// three coefficient sums (f = d⁻², d⁻² log d, d⁻² log² d) costs O(X log D).
pub fn divisor_main_term_truncated(cfg: &ExperimentConfig, d_max: u64) -> Result<f64> {
    cfg.validate()?;
    main_term(cfg, &sequence(cfg)?, d_max)
}

fn main_term(cfg: &ExperimentConfig, a: &[f64], d_max: u64) -> Result<f64> {
    let x = cfg.x as usize;
    let d = d_max as usize;
    let mu: Vec<f64> = (0..=d).map(|j| if j == 0 { 0.0 } else { moebius(j as u64) as f64 }).collect();
    let mut g = vec![[0.0f64; 3]; d + 1];
    for e in 1..=d {
        let mut acc = [0.0f64; 3];
        for j in 1..=d / e {
            if mu[j] == 0.0 {
                continue;
            }
            let k = (e * j) as f64;
            let (l, inv) = (k.ln(), 1.0 / (k * k));
            acc[0] += mu[j] * inv;
            acc[1] += mu[j] * inv * l;
            acc[2] += mu[j] * inv * l * l;
        }
        g[e] = acc;
    }
    // abc[n − X] = (A, B, C)(n).
    let mut abc = vec![[0.0f64; 3]; x + 1];
    for (e, ge) in g.iter().enumerate().skip(1) {
        let step = if e % 2 == 0 { e / 2 } else { e };
        let first = x.div_ceil(step) * step;
        for n in (first..=2 * x).step_by(step) {
            let slot = &mut abc[n - x];
            for i in 0..3 {
                slot[i] += e as f64 * ge[i];
            }
        }
    }
    let terms: Vec<f64> = (0..=x)
        .map(|i| {
            let l = ((x + i) as f64).ln() + 2.0 * EULER_GAMMA;
            let [a0, b0, c0] = abc[i];
            a[i] * (l * l * a0 - 4.0 * l * b0 + 4.0 * c0)
        })
        .collect();
    let mass = mellin_at(&cfg.window, Complex64::new(1.0, 0.0))?.re;
    Ok(cfg.h * mass * pairwise(&terms))
}

/// Σ_h W(h/H) Σ_{X≤n≤2X} a(n)τ(n+h)τ(n−h).
fn exact_side(cfg: &ExperimentConfig, a: &[f64]) -> Result<f64> {
    let x = cfg.x;
    let shifts = shift_weights(&cfg.window, cfg.h);
    let reach = shifts.last().map_or(0, |s| s.0) as usize;
    let tau: Vec<f64> = divisor_sieve(2, 2 * x as usize + reach)?.into_iter().map(|t| t as f64).collect();
    Ok(shifted_sum(x, &shifts, |s, n| {
        a[n - x as usize] * tau[(n as i64 + s) as usize] * tau[(n as i64 - s) as usize]
    }))
}

/// Least-squares polynomial in t = (log X − centre)/scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialFit {
    pub centre: f64,
    pub scale: f64,
    /// Coefficients of t⁰, t¹, ….
    pub coefficients: Vec<f64>,
    pub rms_residual: f64,
}

impl PolynomialFit {
    pub fn eval(&self, log_x: f64) -> f64 {
        let t = (log_x - self.centre) / self.scale;
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

/// Fits a polynomial of the given degree to (xs, ys) by solving the normal equations
/// in a centred, scaled variable.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolynomialFit> {
    let n = degree + 1;
    if xs.len() != ys.len() || xs.len() < n + 1 {
        return Err(Error::DegenerateFit(format!(
            "a degree-{degree} fit needs at least {} points, got {}",
            n + 1,
            xs.len()
        )));
    }
    let centre = xs.iter().sum::<f64>() / xs.len() as f64;
    let scale = xs.iter().map(|x| (x - centre).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let ts: Vec<f64> = xs.iter().map(|x| (x - centre) / scale).collect();
    let mut m = vec![vec![0.0; n + 1]; n];
    for (t, y) in ts.iter().zip(ys) {
        let powers: Vec<f64> = (0..n).map(|i| t.powi(i as i32)).collect();
        for i in 0..n {
            for j in 0..n {
                m[i][j] += powers[i] * powers[j];
            }
            m[i][n] += powers[i] * y;
        }
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        if m[pivot][col].abs() < 1e-12 * m[0][0] {
            return Err(Error::IllConditioned("polynomial normal equations are singular".into()));
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut coefficients = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|j| m[i][j] * coefficients[j]).sum();
        coefficients[i] = (m[i][n] - tail) / m[i][i];
    }
    let mut fit = PolynomialFit { centre, scale, coefficients, rms_residual: 0.0 };
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - fit.eval(*x)).powi(2)).sum();
    fit.rms_residual = (ss / xs.len() as f64).sqrt();
    Ok(fit)
}

/// Measures Σ_h W(h/H) Σ_n τ_k(n)τ(n+h)τ(n−h) / (Ŵ(1)XH) for each X with
/// H = round(X^θ) and fits a polynomial of degree k+1 in log X to it, the shape
/// of the main term in the τ_k-weighted divisor problem.
pub fn tau_k_polynomial_fit(k: u32, x_list: &[u64], theta: f64) -> Result<PolynomialFit> {
    let mut logs = Vec::new();
    let mut normalized = Vec::new();
    for &x in x_list {
        let cfg = ExperimentConfig {
            sequence: SequenceSpec::Tau { k },
            ..ExperimentConfig::new(x, (x as f64).powf(theta).round())
        };
        cfg.validate()?;
        let lhs = exact_side(&cfg, &sequence(&cfg)?)?;
        let mass = mellin_at(&cfg.window, Complex64::new(1.0, 0.0))?.re;
        logs.push((x as f64).ln());
        normalized.push(lhs / (mass * x as f64 * cfg.h));
    }
    fit_polynomial(&logs, &normalized, k as usize + 1)
}

/// Exact Σ_h W(h/H) Σ_n a(n)τ(n+h)τ(n−h) against the truncated main term.
pub fn divisor_main_term(cfg: &ExperimentConfig, d_max: u64) -> Result<DivisorMainTerm> {
    cfg.validate()?;
    if d_max == 0 {
        return Err(Error::Precondition("d_max must be ≥ 1".into()));
    }
    let a = sequence(cfg)?;
    let exact_lhs = exact_side(cfg, &a)?;
    let main = main_term(cfg, &a, d_max)?;
    let half = if d_max >= 2 { main_term(cfg, &a, d_max / 2)? } else { 0.0 };
    let tail_estimate = (main - half).abs();
    if tail_estimate > 0.01 * main.abs() {
        return Err(Error::TailNotCertified { estimate: tail_estimate, main });
    }
    Ok(DivisorMainTerm {
        exact_lhs,
        main_term: main,
        relative_deviation: (exact_lhs - main).abs() / main.abs(),
        tail_estimate,
        d_max,
    })
}
