//! Byte encodings for public keys and signatures.

use super::{PublicKey, Signature};
use crate::error::{Error, Result};
use crate::params::{C_TILDE_BYTES, GAMMA1, K, L, N, OMEGA, PUBLIC_KEY_BYTES, SIGNATURE_BYTES, T1_BITS, Z_BITS};
use crate::ring::rounding::HintVec;
use crate::ring::{centered, reduce_i64, PolyVec};

/// Little-endian bit packing of values `< 2^bits`.
fn pack_bits(values: impl Iterator<Item = u32>, bits: usize, out: &mut Vec<u8>) {
    let mut acc: u64 = 0;
    let mut n = 0;
    for v in values {
        debug_assert!(v < 1 << bits);
        acc |= (v as u64) << n;
        n += bits;
        while n >= 8 {
            out.push(acc as u8);
            acc >>= 8;
            n -= 8;
        }
    }
    debug_assert_eq!(n, 0);
}

fn unpack_bits(bytes: &[u8], bits: usize, count: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(count);
    let mut acc: u64 = 0;
    let mut n = 0;
    let mut it = bytes.iter();
    while out.len() < count {
        while n < bits {
            acc |= (*it.next().expect("length checked by caller") as u64) << n;
            n += 8;
        }
        out.push((acc & ((1 << bits) - 1)) as u32);
        acc >>= bits;
        n -= bits;
    }
    out
}

pub fn encode_public_key(pk: &PublicKey) -> Vec<u8> {
    let mut out = Vec::with_capacity(PUBLIC_KEY_BYTES);
    out.extend_from_slice(&pk.rho);
    pack_bits(pk.t1.coeffs(), T1_BITS, &mut out);
    out
}

pub fn decode_public_key(bytes: &[u8]) -> Result<PublicKey> {
    if bytes.len() != PUBLIC_KEY_BYTES {
        return Err(Error::Malformed("public key length"));
    }
    let mut rho = [0u8; 32];
    rho.copy_from_slice(&bytes[..32]);
    let vals = unpack_bits(&bytes[32..], T1_BITS, K * N);
    Ok(PublicKey::new(rho, PolyVec::from_coeff_iter(K, vals)))
}

pub fn encode_signature(sig: &Signature) -> Vec<u8> {
    let mut out = Vec::with_capacity(SIGNATURE_BYTES);
    out.extend_from_slice(&sig.c_tilde);
    let z_packed = sig.z.coeffs().map(|c| (GAMMA1 as i64 - centered(c) as i64) as u32);
    pack_bits(z_packed, Z_BITS, &mut out);
    // hint: positions of set bits, then the running count per polynomial
    let mut positions = Vec::with_capacity(OMEGA);
    let mut ends = Vec::with_capacity(K);
    for poly in sig.h.bits() {
        for (j, &b) in poly.iter().enumerate() {
            if b {
                positions.push(j as u8);
            }
        }
        ends.push(positions.len() as u8);
    }
    assert!(positions.len() <= OMEGA, "hint weight exceeds omega");
    positions.resize(OMEGA, 0);
    out.extend_from_slice(&positions);
    out.extend_from_slice(&ends);
    debug_assert_eq!(out.len(), SIGNATURE_BYTES);
    out
}

pub fn decode_signature(bytes: &[u8]) -> Result<Signature> {
    if bytes.len() != SIGNATURE_BYTES {
        return Err(Error::Malformed("signature length"));
    }
    let c_tilde = bytes[..C_TILDE_BYTES].to_vec();
    let z_len = L * N * Z_BITS / 8;
    let z_bytes = &bytes[C_TILDE_BYTES..C_TILDE_BYTES + z_len];
    let z_vals = unpack_bits(z_bytes, Z_BITS, L * N);
    let z = PolyVec::from_coeff_iter(L, z_vals.into_iter().map(|v| reduce_i64(GAMMA1 as i64 - v as i64)));

    let hint_bytes = &bytes[C_TILDE_BYTES + z_len..];
    let (positions, ends) = hint_bytes.split_at(OMEGA);
    let mut bits = vec![vec![false; N]; K];
    let mut idx = 0usize;
    for (i, &end) in ends.iter().enumerate() {
        let end = end as usize;
        if end < idx || end > OMEGA {
            return Err(Error::Malformed("hint counts"));
        }
        for j in idx..end {
            if j > idx && positions[j] <= positions[j - 1] {
                return Err(Error::Malformed("hint positions not increasing"));
            }
            bits[i][positions[j] as usize] = true;
        }
        idx = end;
    }
    if positions[idx..].iter().any(|&b| b != 0) {
        return Err(Error::Malformed("hint padding"));
    }
    Ok(Signature { c_tilde, z, h: HintVec::from_bits(bits) })
}

impl Signature {
    pub fn to_bytes(&self) -> Vec<u8> {
        encode_signature(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        decode_signature(bytes)
    }
}

impl PublicKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        encode_public_key(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        decode_public_key(bytes)
    }
}

