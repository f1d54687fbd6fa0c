//! Power2Round, Decompose and the hint toolbox.

use serde::{Deserialize, Serialize};

use super::{Poly, PolyVec};
use crate::params::{D, GAMMA2, N, Q};

/// `2 * gamma2`, the Decompose modulus.
pub const ALPHA: u32 = 2 * GAMMA2;
/// Number of distinct high parts, `(q - 1) / alpha`.
pub const HIGH_MODULUS: u32 = (Q - 1) / ALPHA;

/// Centered remainder of `r mod m` in `(-m/2, m/2]` for even `m`.
#[inline]
fn mod_pm(r: u32, m: u32) -> i32 {
    let x = r % m;
    if x > m / 2 {
        x as i32 - m as i32
    } else {
        x as i32
    }
}

/// Splits `r` into `(r1, r0)` with `r = r1 * 2^d + r0` and `r0` in `(-2^(d-1), 2^(d-1)]`.
pub fn power2round(r: u32) -> (u32, i32) {
    let r0 = mod_pm(r, 1 << D);
    let r1 = ((r as i64 - r0 as i64) >> D) as u32;
    (r1, r0)
}

/// Splits `r` into `(high, low)` with `r = high * alpha + low (mod q)`.
///
/// `low` lies in `(-gamma2, gamma2]`, except in the wraparound case
/// `r - low = q - 1` where `high` becomes 0 and `low` drops by one.
pub fn decompose(r: u32) -> (u32, i32) {
    debug_assert!(r < Q);
    let mut r0 = mod_pm(r, ALPHA);
    let diff = r as i64 - r0 as i64;
    if diff == Q as i64 - 1 {
        r0 -= 1;
        (0, r0)
    } else {
        ((diff / ALPHA as i64) as u32, r0)
    }
}

pub fn high_bits(r: u32) -> u32 {
    decompose(r).0
}

pub fn low_bits(r: u32) -> i32 {
    decompose(r).1
}

/// True when adding `z` to `r` changes the high part.
pub fn make_hint_coeff(z: u32, r: u32) -> bool {
    let sum = (z + r) % Q;
    high_bits(r) != high_bits(sum)
}

pub fn use_hint_coeff(h: bool, r: u32) -> u32 {
    let (r1, r0) = decompose(r);
    if !h {
        r1
    } else if r0 > 0 {
        (r1 + 1) % HIGH_MODULUS
    } else {
        (r1 + HIGH_MODULUS - 1) % HIGH_MODULUS
    }
}

/// One hint bit per coefficient of a `k`-vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintVec {
    bits: Vec<Vec<bool>>,
}

impl HintVec {
    pub fn zero(dim: usize) -> Self {
        Self { bits: vec![vec![false; N]; dim] }
    }

    pub fn from_bits(bits: Vec<Vec<bool>>) -> Self {
        assert!(bits.iter().all(|b| b.len() == N));
        Self { bits }
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[Vec<bool>] {
        &self.bits
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().flatten().filter(|&&b| b).count()
    }
}

/// Componentwise map producing a vector of small integers.
fn map_coeffs<T>(v: &PolyVec, f: impl Fn(u32) -> T) -> Vec<Vec<T>> {
    v.polys().iter().map(|p| p.coeffs().iter().map(|&c| f(c)).collect()).collect()
}

pub fn power2round_vec(t: &PolyVec) -> (PolyVec, PolyVec) {
    let mut t1 = PolyVec::zero(t.dim());
    let mut t0 = PolyVec::zero(t.dim());
    for (i, p) in t.polys().iter().enumerate() {
        for (j, &c) in p.coeffs().iter().enumerate() {
            let (hi, lo) = power2round(c);
            t1.polys_mut()[i].coeffs_mut()[j] = hi;
            t0.polys_mut()[i].coeffs_mut()[j] = super::reduce_i64(lo as i64);
        }
    }
    (t1, t0)
}

pub fn high_bits_vec(v: &PolyVec) -> Vec<Vec<u32>> {
    map_coeffs(v, high_bits)
}

pub fn low_bits_vec(v: &PolyVec) -> Vec<Vec<i32>> {
    map_coeffs(v, low_bits)
}

/// Largest `|LowBits(c)|` over all coefficients.
pub fn low_bits_inf_norm(v: &PolyVec) -> u32 {
    v.coeffs().map(|c| low_bits(c).unsigned_abs()).max().unwrap_or(0)
}

pub fn make_hint(z: &PolyVec, r: &PolyVec) -> HintVec {
    assert_eq!(z.dim(), r.dim());
    let bits = z
        .polys()
        .iter()
        .zip(r.polys())
        .map(|(zp, rp)| {
            zp.coeffs().iter().zip(rp.coeffs()).map(|(&a, &b)| make_hint_coeff(a, b)).collect()
        })
        .collect();
    HintVec { bits }
}

pub fn use_hint(h: &HintVec, r: &PolyVec) -> Vec<Vec<u32>> {
    assert_eq!(h.dim(), r.dim());
    h.bits
        .iter()
        .zip(r.polys())
        .map(|(hp, rp)| hp.iter().zip(rp.coeffs()).map(|(&b, &c)| use_hint_coeff(b, c)).collect())
        .collect()
}

/// Packs high parts (each `< 16`) at 4 bits per coefficient.
pub fn encode_w1(w1: &[Vec<u32>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(w1.len() * N / 2);
    for poly in w1 {
        for pair in poly.chunks_exact(2) {
            out.push((pair[0] | (pair[1] << 4)) as u8);
        }
    }
    out
}

impl Poly {
    pub fn high_bits(&self) -> [u32; N] {
        self.coeffs().map(high_bits)
    }
}
