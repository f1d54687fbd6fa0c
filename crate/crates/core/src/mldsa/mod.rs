//! Single-signer ML-DSA-65.
//!
//! Serves as the baseline signer for the rejection statistics and as the
//! verifier every threshold signature is checked against. Hashing follows
//! the domain-separated layout of [`crate::hash`]; the message is signed
//! as-is without the FIPS 204 message-representative pipeline.

pub mod encoding;
pub mod sampling;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::{self, tag};
use crate::params::{C_TILDE_BYTES, D, GAMMA2, K, L, OMEGA, R0_BOUND, Z_BOUND};
use crate::ring::rounding::{self, HintVec};
use crate::ring::{Matrix, Poly, PolyVec};

pub use encoding::{decode_signature, encode_signature};
pub use sampling::{expand_a, sample_in_ball};

/// Default cap on signing attempts.
pub const DEFAULT_RETRY_CAP: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKey {
    pub rho: [u8; 32],
    pub t1: PolyVec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    pub rho: [u8; 32],
    pub s1: PolyVec,
    pub s2: PolyVec,
    pub t0: PolyVec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub c_tilde: Vec<u8>,
    pub z: PolyVec,
    pub h: HintVec,
}

impl PublicKey {
    pub fn new(rho: [u8; 32], t1: PolyVec) -> Self {
        Self { rho, t1 }
    }

    pub fn matrix(&self) -> Matrix {
        expand_a(&self.rho)
    }

    /// `t1 * 2^d` in R_q^k.
    pub fn t1_shifted(&self) -> PolyVec {
        self.t1.scale(1 << D)
    }
}

/// Splits `t = A s1 + s2` into `(t1, t0)` and builds the key pair.
pub fn keypair_from_secrets(rho: [u8; 32], s1: PolyVec, s2: PolyVec) -> (PublicKey, SecretKey) {
    let a = expand_a(&rho);
    let t = &a.mul_vec(&s1) + &s2;
    let (t1, t0) = rounding::power2round_vec(&t);
    (PublicKey::new(rho, t1), SecretKey { rho, s1, s2, t0 })
}

/// Deterministic key generation from a 32-byte seed.
pub fn keygen(seed: &[u8; 32]) -> (PublicKey, SecretKey) {
    let mut expanded = [0u8; 128];
    hash::shake256(&[seed, &[K as u8, L as u8]], &mut expanded);
    let mut rho = [0u8; 32];
    rho.copy_from_slice(&expanded[..32]);
    let mut rho_prime = [0u8; 64];
    rho_prime.copy_from_slice(&expanded[32..96]);
    let (s1, s2) = sampling::expand_s(&rho_prime);
    keypair_from_secrets(rho, s1, s2)
}

/// `c_tilde = H("chal" || mu || w1Encode(w1))`, shared by signer and verifier.
pub fn challenge_hash(mu: &[u8], w1: &[Vec<u32>]) -> [u8; C_TILDE_BYTES] {
    let w1_bytes = rounding::encode_w1(w1);
    hash::tagged_hash(tag::CHAL, &[mu, &w1_bytes])
}

/// Which abort condition fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AbortKind {
    ZBound,
    R0,
    HintWeight,
    /// The combined signature failed the final verification.
    InvalidSignature,
}

/// Pass/fail of every rejection check for one attempt, evaluated independently.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttemptChecks {
    pub z_ok: bool,
    pub r0_ok: bool,
    pub hint_ok: bool,
}

impl AttemptChecks {
    pub fn passed(&self) -> bool {
        self.z_ok && self.r0_ok && self.hint_ok
    }

    /// First failing check in signing order.
    pub fn abort_kind(&self) -> Option<AbortKind> {
        if !self.z_ok {
            Some(AbortKind::ZBound)
        } else if !self.r0_ok {
            Some(AbortKind::R0)
        } else if !self.hint_ok {
            Some(AbortKind::HintWeight)
        } else {
            None
        }
    }
}

/// Precomputed signer state.
pub struct Signer<'a> {
    sk: &'a SecretKey,
    a: Matrix,
}

impl<'a> Signer<'a> {
    pub fn new(sk: &'a SecretKey) -> Self {
        Self { sk, a: expand_a(&sk.rho) }
    }

    /// One attempt of the Fiat-Shamir-with-aborts loop. All checks are
    /// evaluated so rejection statistics can be collected per check.
    pub fn attempt<R: RngCore + CryptoRng>(&self, mu: &[u8], rng: &mut R) -> (AttemptChecks, Option<Signature>) {
        let y = sampling::sample_mask(rng);
        let w = self.a.mul_vec(&y);
        let w1 = rounding::high_bits_vec(&w);
        let c_tilde = challenge_hash(mu, &w1);
        let c = sample_in_ball(&c_tilde);
        let c_hat = c.ntt();
        let cs1 = self.sk.s1.mul_ntt(&c_hat);
        let cs2 = self.sk.s2.mul_ntt(&c_hat);
        let ct0 = self.sk.t0.mul_ntt(&c_hat);
        let z = &y + &cs1;
        let z_ok = z.inf_norm() < Z_BOUND;
        let w_minus_cs2 = &w - &cs2;
        let r0_ok = rounding::low_bits_inf_norm(&w_minus_cs2) < R0_BOUND;
        let h = rounding::make_hint(&(-&ct0), &(&w_minus_cs2 + &ct0));
        let hint_ok = h.weight() <= OMEGA && ct0.inf_norm() < GAMMA2;
        let checks = AttemptChecks { z_ok, r0_ok, hint_ok };
        let sig = checks.passed().then(|| Signature { c_tilde: c_tilde.to_vec(), z, h });
        (checks, sig)
    }

    pub fn sign<R: RngCore + CryptoRng>(&self, mu: &[u8], rng: &mut R, retry_cap: usize) -> Result<(Signature, usize)> {
        for attempt in 1..=retry_cap {
            if let (_, Some(sig)) = self.attempt(mu, rng) {
                return Ok((sig, attempt));
            }
        }
        Err(Error::RetryLimit(retry_cap))
    }
}

/// Signs `mu`, returning the signature and the number of attempts used.
pub fn sign_single<R: RngCore + CryptoRng>(
    sk: &SecretKey,
    mu: &[u8],
    rng: &mut R,
    retry_cap: usize,
) -> Result<(Signature, usize)> {
    Signer::new(sk).sign(mu, rng, retry_cap)
}

/// Reason a signature was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyFailure {
    Malformed(&'static str),
    ZNorm { norm: u32 },
    HintWeight { weight: usize },
    ChallengeMismatch,
}

impl std::fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Malformed(what) => write!(f, "malformed signature: {what}"),
            Self::ZNorm { norm } => write!(f, "response norm {norm} >= bound {Z_BOUND}"),
            Self::HintWeight { weight } => write!(f, "hint weight {weight} > {OMEGA}"),
            Self::ChallengeMismatch => write!(f, "recomputed challenge does not match"),
        }
    }
}

/// Verification with diagnostics.
pub fn verify_detailed(pk: &PublicKey, mu: &[u8], sig: &Signature) -> std::result::Result<(), VerifyFailure> {
    if sig.c_tilde.len() != C_TILDE_BYTES {
        return Err(VerifyFailure::Malformed("challenge length"));
    }
    if sig.z.dim() != L || sig.h.dim() != K {
        return Err(VerifyFailure::Malformed("dimensions"));
    }
    let norm = sig.z.inf_norm();
    if norm >= Z_BOUND {
        return Err(VerifyFailure::ZNorm { norm });
    }
    let weight = sig.h.weight();
    if weight > OMEGA {
        return Err(VerifyFailure::HintWeight { weight });
    }
    let c = sample_in_ball(&sig.c_tilde);
    let c_hat = c.ntt();
    let az = pk.matrix().mul_vec(&sig.z);
    let ct1 = pk.t1_shifted().mul_ntt(&c_hat);
    let w_approx = &az - &ct1;
    let w1 = rounding::use_hint(&sig.h, &w_approx);
    if challenge_hash(mu, &w1)[..] == sig.c_tilde[..] {
        Ok(())
    } else {
        Err(VerifyFailure::ChallengeMismatch)
    }
}

pub fn verify(pk: &PublicKey, mu: &[u8], sig: &Signature) -> bool {
    verify_detailed(pk, mu, sig).is_ok()
}

/// Verifies an encoded signature; malformed input is rejected, never an error.
pub fn verify_bytes(pk: &PublicKey, mu: &[u8], sig: &[u8]) -> bool {
    match decode_signature(sig) {
        Ok(s) => verify(pk, mu, &s),
        Err(_) => false,
    }
}

impl SecretKey {
    pub fn public_key(&self) -> PublicKey {
        keypair_from_secrets(self.rho, self.s1.clone(), self.s2.clone()).0
    }
}

/// Convenience for tests and the threshold combiner: `c * v` for a challenge.
pub fn challenge_times(c: &Poly, v: &PolyVec) -> PolyVec {
    v.mul_poly(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ETA, SIGNATURE_BYTES};
    use crate::ring::reduce_i64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn keygen_reassembles_t() {
        let (pk, sk) = keygen(&[1u8; 32]);
        assert!(sk.s1.inf_norm() <= ETA && sk.s2.inf_norm() <= ETA);
        let a = expand_a(&sk.rho);
        let t = &a.mul_vec(&sk.s1) + &sk.s2;
        assert_eq!(&pk.t1_shifted() + &sk.t0, t);
        assert!(pk.t1.coeffs().all(|c| c < 1 << 10));
        assert_eq!(keygen(&[1u8; 32]).0, pk);
    }

    #[test]
    fn sign_verify_and_negative_cases() {
        let (pk, sk) = keygen(&[2u8; 32]);
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let msg = b"attack at dawn";
        let (sig, attempts) = sign_single(&sk, msg, &mut rng, DEFAULT_RETRY_CAP).unwrap();
        assert!(attempts >= 1);
        assert!(verify(&pk, msg, &sig));

        let mut flipped = msg.to_vec();
        flipped[0] ^= 1;
        assert_eq!(verify_detailed(&pk, &flipped, &sig), Err(VerifyFailure::ChallengeMismatch));

        let mut bumped = sig.clone();
        bumped.z.polys_mut()[2].coeffs_mut()[100] = Z_BOUND;
        assert!(matches!(verify_detailed(&pk, msg, &bumped), Err(VerifyFailure::ZNorm { .. })));
        bumped.z.polys_mut()[2].coeffs_mut()[100] = reduce_i64(-(Z_BOUND as i64));
        assert!(!verify(&pk, msg, &bumped));

        let (other_pk, _) = keygen(&[3u8; 32]);
        assert!(!verify(&other_pk, msg, &sig));
    }

    #[test]
    fn encoding_roundtrip_and_errors() {
        let (pk, sk) = keygen(&[4u8; 32]);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (sig, _) = sign_single(&sk, b"m", &mut rng, DEFAULT_RETRY_CAP).unwrap();
        let bytes = encode_signature(&sig);
        assert_eq!(bytes.len(), SIGNATURE_BYTES);
        assert_eq!(bytes.len(), 3309);
        assert_eq!(decode_signature(&bytes).unwrap(), sig);
        assert!(verify_bytes(&pk, b"m", &bytes));
        assert!(decode_signature(&bytes[..bytes.len() - 1]).is_err());
        assert!(!verify_bytes(&pk, b"m", &bytes[..100]));

        let mut bad = bytes.clone();
        *bad.last_mut().unwrap() = 200; // hint count beyond omega
        assert!(decode_signature(&bad).is_err());

        assert_eq!(PublicKey::from_bytes(&pk.to_bytes()).unwrap(), pk);
        assert_eq!(pk.to_bytes().len(), crate::params::PUBLIC_KEY_BYTES);
    }

    #[test]
    fn retry_cap_is_enforced() {
        let (_, sk) = keygen(&[5u8; 32]);
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        // a cap of zero can never succeed
        assert!(matches!(sign_single(&sk, b"x", &mut rng, 0), Err(Error::RetryLimit(0))));
    }
}
