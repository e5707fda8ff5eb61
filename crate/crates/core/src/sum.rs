//! Deterministic summation.

use num_complex::Complex64;

const LEAF: usize = 32;

/// Fixed-order pairwise (tree) summation. The split points depend only on the
/// length, so the result is bit-identical across runs and thread counts.
pub fn pairwise(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise(&xs[..mid]) + pairwise(&xs[mid..])
}

pub fn pairwise_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_complex(&xs[..mid]) + pairwise_complex(&xs[mid..])
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
