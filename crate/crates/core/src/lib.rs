//! Computable objects around shifted convolution sums of Hecke eigenvalues.
//!
//! The crate is organised bottom-up:
//!
//! - [`coeffs`]: exact q-expansions of the level-one eigenforms of weight 12 and 16
//!   and divisor functions.
//! - [`arith`]: totients, Möbius, Ramanujan and Kloosterman sums.
//! - [`windows`]: the smooth bump window, Bessel functions, the W★ transform and
//!   the holomorphic/Maass Kuznetsov transforms.
//! - [`circle`]: Jutila's approximation of the unit interval by Farey arcs, with an
//!   exact L² error.
//! - [`voronoi`]: two-sided numerical Voronoi summation.
//! - [`spectral`]: the Petersson formula on one-dimensional spaces and the
//!   holomorphic large sieve.
//! - [`correlations`]: pair/triple correlations, the divisor main term, Wilton sums,
//!   the γ★ norm, the circle-method pipeline and scaling fits.
//! - [`report`]: experiment reports and their CSV/JSON serialization.

pub mod arith;
pub mod circle;
pub mod coeffs;
pub mod correlations;
pub mod error;
pub mod fit;
pub mod ntt;
pub mod quad;
pub mod report;
pub mod series;
pub mod spectral;
pub mod sum;
pub mod voronoi;
pub mod windows;

pub use error::{Error, Result};

/// e(x) = exp(2πix).
#[inline]
pub fn e(x: f64) -> num_complex::Complex64 {
    let (s, c) = (std::f64::consts::TAU * x).sin_cos();
    num_complex::Complex64::new(c, s)
}

/// e(r/q) with the numerator reduced exactly modulo q before conversion.
#[inline]
pub fn e_rational(r: i128, q: u64) -> num_complex::Complex64 {
    let q = q as i128;
    let r = r.rem_euclid(q);
    e(r as f64 / q as f64)
}
