//! Deterministic expansion of seeds into ring elements.

use rand::{CryptoRng, Rng, RngCore};
use sha3::digest::XofReader;

use crate::hash::{shake128_reader, shake256_reader};
use crate::params::{ETA, GAMMA1, K, L, N, Q, TAU};
use crate::ring::{reduce_i64, Matrix, NttPoly, Poly, PolyVec};

/// Rejection-samples 23-bit candidates from an XOF until `N` values `< q`.
pub(crate) fn rej_uniform(xof: &mut impl XofReader) -> [u32; N] {
    let mut out = [0u32; N];
    let mut filled = 0;
    let mut buf = [0u8; 168];
    while filled < N {
        xof.read(&mut buf);
        for chunk in buf.chunks_exact(3) {
            let c = u32::from_le_bytes([chunk[0], chunk[1], chunk[2] & 0x7f, 0]);
            if c < Q {
                out[filled] = c;
                filled += 1;
                if filled == N {
                    break;
                }
            }
        }
    }
    out
}

/// Expands `rho` into the public matrix, sampled directly in the NTT domain.
pub fn expand_a(rho: &[u8; 32]) -> Matrix {
    let rows = (0..K)
        .map(|r| {
            (0..L)
                .map(|s| {
                    let mut xof = shake128_reader(&[rho, &[s as u8, r as u8]]);
                    NttPoly::from_evals(rej_uniform(&mut xof))
                })
                .collect()
        })
        .collect();
    Matrix::from_rows(rows)
}

fn rej_bounded(xof: &mut impl XofReader) -> Poly {
    let mut out = [0i64; N];
    let mut filled = 0;
    let mut byte = [0u8; 1];
    while filled < N {
        xof.read(&mut byte);
        for nibble in [byte[0] & 0x0f, byte[0] >> 4] {
            if filled < N && (nibble as u32) < 2 * ETA + 1 {
                out[filled] = ETA as i64 - nibble as i64;
                filled += 1;
            }
        }
    }
    Poly::from_signed(&out)
}

/// Expands `rho_prime` into `(s1, s2)` with coefficients in `[-eta, eta]`.
pub fn expand_s(rho_prime: &[u8; 64]) -> (PolyVec, PolyVec) {
    let sample = |idx: u16| {
        let mut xof = shake256_reader(&[rho_prime, &idx.to_le_bytes()]);
        rej_bounded(&mut xof)
    };
    let s1 = PolyVec::from_polys((0..L as u16).map(sample).collect());
    let s2 = PolyVec::from_polys((L as u16..(L + K) as u16).map(sample).collect());
    (s1, s2)
}

/// Samples an `l`-vector with coefficients in `[-bound, bound]`.
pub fn sample_symmetric<R: RngCore + CryptoRng>(rng: &mut R, dim: usize, bound: u32) -> PolyVec {
    let b = bound as i64;
    PolyVec::from_coeff_iter(dim, (0..dim * N).map(|_| reduce_i64(rng.gen_range(-b..=b))))
}

/// Samples the single-signer nonce with coefficients in `[-gamma1 + 1, gamma1]`.
pub fn sample_mask<R: RngCore + CryptoRng>(rng: &mut R) -> PolyVec {
    let g = GAMMA1 as i64;
    PolyVec::from_coeff_iter(L, (0..L * N).map(|_| reduce_i64(rng.gen_range(-g + 1..=g))))
}

/// Samples a short secret vector of dimension `dim` with coefficients in `[-eta, eta]`.
pub fn sample_short<R: RngCore + CryptoRng>(rng: &mut R, dim: usize) -> PolyVec {
    sample_symmetric(rng, dim, ETA)
}

/// Derives the challenge polynomial: exactly `tau` coefficients in `{-1, +1}`.
pub fn sample_in_ball(c_tilde: &[u8]) -> Poly {
    let mut xof = shake256_reader(&[c_tilde]);
    let mut sign_bytes = [0u8; 8];
    xof.read(&mut sign_bytes);
    let signs = u64::from_le_bytes(sign_bytes);
    let mut c = [0i64; N];
    let mut byte = [0u8; 1];
    for (bit, i) in (N - TAU..N).enumerate() {
        let j = loop {
            xof.read(&mut byte);
            if (byte[0] as usize) <= i {
                break byte[0] as usize;
            }
        };
        c[i] = c[j];
        c[j] = if (signs >> bit) & 1 == 1 { -1 } else { 1 };
    }
    Poly::from_signed(&c)
}
