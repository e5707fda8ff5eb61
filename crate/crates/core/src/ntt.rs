//! Exact integer convolution through number-theoretic transforms over several
//! word-size primes, recombined with Garner's algorithm.
//!
//! Each prime is `c·2^k + 1` with `k ≥ 21`, so transforms up to length 2^21 are
//! available for every prime. The number of primes is chosen from a bound on the
//! output coefficients, which makes the result exact rather than probabilistic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use std::sync::OnceLock;

pub(crate) const PRIMES: [u64; 11] = [
    2013265921, 1811939329, 469762049, 2113929217, 167772161, 754974721, 1224736769,
    2130706433, 998244353, 1004535809, 985661441,
];

pub const MAX_TRANSFORM_LOG2: u32 = 21;

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn primitive_root(p: u64) -> u64 {
    let fs = prime_factors(p - 1);
    (2..p)
        .find(|&g| fs.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("prime has a primitive root")
}

fn roots() -> &'static [u64; PRIMES.len()] {
    static ROOTS: OnceLock<[u64; PRIMES.len()]> = OnceLock::new();
    ROOTS.get_or_init(|| {
        let mut r = [0; PRIMES.len()];
        for (slot, &p) in r.iter_mut().zip(PRIMES.iter()) {
            *slot = primitive_root(p);
        }
        r
    })
}

fn transform(a: &mut [u64], invert: bool, p: u64, g: u64) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w_len = pow_mod(g, (p - 1) / len as u64, p);
        if invert {
            w_len = pow_mod(w_len, p - 2, p);
        }
        let half = len / 2;
        let mut tw = Vec::with_capacity(half);
        let mut w = 1u64;
        for _ in 0..half {
            tw.push(w);
            w = mul_mod(w, w_len, p);
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &t) in lo.iter_mut().zip(hi.iter_mut()).zip(&tw) {
                let x = *u;
                let y = mul_mod(*v, t, p);
                *u = if x + y >= p { x + y - p } else { x + y };
                *v = if x >= y { x - y } else { x + p - y };
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = pow_mod(n as u64, p - 2, p);
        for x in a.iter_mut() {
            *x = mul_mod(*x, n_inv, p);
        }
    }
}

/// Cyclic-free convolution modulo the `idx`-th prime, truncated to `out_len`.
fn convolve_mod(a: &[u64], b: &[u64], out_len: usize, idx: usize) -> Vec<u64> {
    let p = PRIMES[idx];
    let g = roots()[idx];
    let full = a.len() + b.len() - 1;
    let n = full.next_power_of_two();
    assert!(
        n.trailing_zeros() <= MAX_TRANSFORM_LOG2,
        "transform length {n} exceeds 2^{MAX_TRANSFORM_LOG2}"
    );
    let mut fa = vec![0u64; n];
    let mut fb = vec![0u64; n];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    transform(&mut fa, false, p, g);
    transform(&mut fb, false, p, g);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = mul_mod(*x, *y, p);
    }
    transform(&mut fa, true, p, g);
    fa.truncate(out_len.min(full));
    fa
}

fn residue(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits in u64")
}

fn max_bits(xs: &[BigInt]) -> u64 {
    xs.iter().map(|x| x.bits()).max().unwrap_or(0)
}

/// Exact product of two integer polynomials, truncated to `out_len` terms.
pub fn convolve_exact(a: &[BigInt], b: &[BigInt], out_len: usize) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() || out_len == 0 {
        return vec![BigInt::zero(); out_len];
    }
    let a = &a[..a.len().min(out_len)];
    let b = &b[..b.len().min(out_len)];
    let terms = a.len().min(b.len()) as u64;
    // |c_k| ≤ terms·max|a|·max|b|; the modulus must exceed twice that.
    let need_bits = max_bits(a) + max_bits(b) + (64 - terms.leading_zeros() as u64) + 2;
    let mut k = 0;
    let mut have_bits = 0.0;
    while have_bits <= need_bits as f64 {
        assert!(k < PRIMES.len(), "coefficients too large for the prime set");
        have_bits += (PRIMES[k] as f64).log2();
        k += 1;
    }
    let residues: Vec<Vec<u64>> = (0..k)
        .map(|i| {
            let p = PRIMES[i];
            let ra: Vec<u64> = a.iter().map(|x| residue(x, p)).collect();
            let rb: Vec<u64> = b.iter().map(|x| residue(x, p)).collect();
            convolve_mod(&ra, &rb, out_len, i)
        })
        .collect();
    let len = residues[0].len();
    let mut out = crt_garner(&residues, len);
    out.resize(out_len, BigInt::zero());
    out
}

fn crt_garner(residues: &[Vec<u64>], len: usize) -> Vec<BigInt> {
    let k = residues.len();
    // inv[i][j] = p_j^{-1} mod p_i for j < i
    let mut inv = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in 0..i {
            inv[i][j] = pow_mod(PRIMES[j] % PRIMES[i], PRIMES[i] - 2, PRIMES[i]);
        }
    }
    let mut modulus = BigInt::from(1u8);
    let mut prefix = Vec::with_capacity(k);
    for &p in PRIMES.iter().take(k) {
        prefix.push(modulus.clone());
        modulus *= p;
    }
    let half = &modulus >> 1;
    let mut out = Vec::with_capacity(len);
    let mut digits = vec![0u64; k];
    for t in 0..len {
        for i in 0..k {
            let p = PRIMES[i];
            let mut x = residues[i][t];
            for j in 0..i {
                let d = digits[j] % p;
                x = if x >= d { x - d } else { x + p - d };
                x = mul_mod(x, inv[i][j], p);
            }
            digits[i] = x;
        }
        let mut v = BigInt::zero();
        for i in (0..k).rev() {
            v += &prefix[i] * digits[i];
        }
        if v > half {
            v -= &modulus;
        }
        out.push(v);
    }
    out
}

/// Schoolbook product skipping zero entries, truncated to `out_len` terms.
pub fn convolve_schoolbook(a: &[BigInt], b: &[BigInt], out_len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); out_len];
    let nb: Vec<(usize, &BigInt)> = b.iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
    for (i, x) in a.iter().enumerate().take(out_len) {
        if x.is_zero() {
            continue;
        }
        for &(j, y) in &nb {
            if i + j >= out_len {
                break;
            }
            out[i + j] += x * y;
        }
    }
    out
}

/// Picks schoolbook for sparse or short operands and the transform otherwise.
pub fn convolve(a: &[BigInt], b: &[BigInt], out_len: usize) -> Vec<BigInt> {
    let nnz = |xs: &[BigInt]| xs.iter().take(out_len).filter(|x| !x.is_zero()).count();
    let work = nnz(a).saturating_mul(nnz(b));
    if work <= 4_000_000 {
        convolve_schoolbook(a, b, out_len)
    } else {
        convolve_exact(a, b, out_len)
    }
}
