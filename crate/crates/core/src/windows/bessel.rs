//! Bessel functions J_ν(x) of real order ν ≥ 0 and real argument x ≥ 0.
//!
//! Evaluation tries, in order: the power series (accepted only when its
//! cancellation is mild), Hankel's asymptotic expansion (accepted only when
//! it converges to working precision before diverging), Miller's backward
//! recurrence for integer orders, and Schläfli's integral otherwise.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::quad::{oscillatory, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselStrategy {
    Zero,
    Series,
    Hankel,
    Miller,
    Integral,
}

/// J_ν for a fixed order.
#[derive(Debug, Clone, Copy)]
pub struct BesselKernel {
    nu: f64,
}

impl BesselKernel {
    pub fn new(nu: f64) -> Self {
        assert!(nu >= 0.0 && nu.is_finite(), "Bessel order must be finite and ≥ 0, got {nu}");
        Self { nu }
    }

    pub fn order(&self) -> f64 {
        self.nu
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_strategy(x).0
    }

    pub fn eval_with_strategy(&self, x: f64) -> (f64, BesselStrategy) {
        let nu = self.nu;
        assert!(x >= 0.0, "Bessel argument must be ≥ 0, got {x}");
        if x == 0.0 {
            return (if nu == 0.0 { 1.0 } else { 0.0 }, BesselStrategy::Zero);
        }
        if x <= 12.0 || x <= nu {
            if let Some(v) = series(nu, x) {
                return (v, BesselStrategy::Series);
            }
        }
        if x >= 20.0 {
            if let Some(v) = hankel(nu, x) {
                return (v, BesselStrategy::Hankel);
            }
        }
        if nu.fract() == 0.0 {
            (miller(nu as usize, x), BesselStrategy::Miller)
        } else {
            (integral(nu, x), BesselStrategy::Integral)
        }
    }
}

/// J_ν(x) by the best available strategy.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    BesselKernel::new(nu).eval(x)
}

const SERIES_CONDITION_LIMIT: f64 = 1e3;

/// Σ_k (−1)^k (x/2)^{2k+ν} / (k! Γ(k+ν+1)), or `None` if the sum cancels by
/// more than three digits.
pub fn series(nu: f64, x: f64) -> Option<f64> {
    let h = 0.5 * x;
    let log_t0 = nu * h.ln() - libm::lgamma(nu + 1.0);
    if log_t0 < -745.0 {
        return Some(0.0);
    }
    let mut t = log_t0.exp();
    let q = h * h;
    let (mut sum, mut abs_sum) = (t, t.abs());
    for k in 1..10_000 {
        let kf = k as f64;
        t *= -q / (kf * (kf + nu));
        sum += t;
        abs_sum += t.abs();
        if t.abs() <= 1e-17 * sum.abs() && kf > q.sqrt() {
            break;
        }
    }
    if sum == 0.0 || abs_sum > SERIES_CONDITION_LIMIT * sum.abs() {
        None
    } else {
        Some(sum)
    }
}

/// Hankel's expansion √(2/(πx))(P cos χ − Q sin χ), χ = x − (ν/2 + 1/4)π.
pub fn hankel(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    let mut converged = false;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        let mag = a.abs();
        if mag > prev || mag > 1e3 {
            return None;
        }
        // Terms alternate between Q and P with signs + , −, −, +, + , −, …
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * a;
        } else {
            p += sign * a;
        }
        if mag < 1e-17 {
            converged = true;
            break;
        }
        prev = mag;
    }
    if !converged {
        return None;
    }
    let chi = reduced_phase(x, nu);
    Some((2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin()))
}

/// x − (ν/2 + 1/4)π with the multiple of π/2 removed exactly when ν is an integer.
fn reduced_phase(x: f64, nu: f64) -> f64 {
    if nu.fract() == 0.0 {
        let quarter_turns = (nu as u64) % 4;
        x - FRAC_PI_4 - quarter_turns as f64 * FRAC_PI_2
    } else {
        x - (0.5 * nu + 0.25) * PI
    }
}

/// Miller's backward recurrence normalised by J₀ + 2Σ_k J_{2k} = 1.
pub fn miller(n: usize, x: f64) -> f64 {
    let top = n.max(x.ceil() as usize);
    let mut m = top + 30 + (60.0 * top as f64).sqrt() as usize;
    m += m % 2;
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=m).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        // j now holds the unnormalised J_{k-1}
        if k - 1 == n {
            result = j;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
    }
    norm += j;
    result / norm
}

/// Schläfli's integral
/// J_ν(x) = (1/π)∫₀^π cos(νθ − x sin θ)dθ − (sin νπ/π)∫₀^∞ e^{−x sinh s − νs} ds.
/// For integer ν the second term vanishes and this is Bessel's integral.
pub fn integral(nu: f64, x: f64) -> f64 {
    let tol = Tolerance { abs: 1e-15, rel: 1e-14 };
    let freq = nu + x + 1.0;
    let main: f64 = oscillatory(0.0, PI, freq, 4, tol, |t| (nu * t - x * t.sin()).cos())
        .expect("Bessel integral converges");
    let main = main / PI;
    let s = (nu * PI).sin();
    if nu.fract() == 0.0 || s == 0.0 {
        return main;
    }
    // e^{−x sinh s − νs} < e^{−40} beyond `end`.
    let f = |t: f64| x * t.sinh() + nu * t;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) < 40.0 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 40.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rate = x * hi.cosh() + nu;
    let tail: f64 = oscillatory(0.0, hi, rate, 8, tol, |t| (-f(t)).exp())
        .expect("Schläfli tail converges");
    main - s / PI * tail
}
