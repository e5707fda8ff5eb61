//! Truncated integer power series in q.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::ops::Mul;

use crate::ntt;

/// Power series Σ c_n qⁿ known for 0 ≤ n < len.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    coefficients: Vec<BigInt>,
}

impl QSeries {
    pub fn new(coefficients: Vec<BigInt>) -> Self {
        Self { coefficients }
    }

    pub fn one(len: usize) -> Self {
        let mut c = vec![BigInt::zero(); len];
        if len > 0 {
            c[0] = BigInt::one();
        }
        Self { coefficients: c }
    }

    /// Builds a series from sparse `(exponent, coefficient)` pairs.
    pub fn from_sparse(len: usize, terms: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut c = vec![BigInt::zero(); len];
        for (n, v) in terms {
            if n < len {
                c[n] += v;
            }
        }
        Self { coefficients: c }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<BigInt> {
        self.coefficients
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coefficients[n]
    }

    pub fn truncate(&mut self, len: usize) {
        self.coefficients.truncate(len);
    }

    /// Multiplies by qᵏ, keeping the length.
    pub fn shift(&self, k: usize) -> Self {
        let len = self.len();
        let mut c = vec![BigInt::zero(); len];
        for (i, x) in self.coefficients.iter().enumerate().take(len.saturating_sub(k)) {
            c[i + k] = x.clone();
        }
        Self { coefficients: c }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut result = Self::one(self.len());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }
}

impl Mul for &QSeries {
    type Output = QSeries;

    /// Product truncated to the shorter operand, so that the known terms are
    /// exactly the ones determined by the inputs.
    fn mul(self, rhs: &QSeries) -> QSeries {
        let len = self.len().min(rhs.len());
        QSeries { coefficients: ntt::convolve(&self.coefficients, &rhs.coefficients, len) }
    }
}
