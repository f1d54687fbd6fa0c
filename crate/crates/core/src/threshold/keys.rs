//! Threshold key material: per-party shares and the public registry.

use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::{tag, tagged_hash};
use crate::masking::{DealerSeeds, SeedBook, SeedProvisioning};
use crate::mldsa::{self, PublicKey, SecretKey};
use crate::params::{K, L};
use crate::ring::PolyVec;
use crate::shamir;
use crate::PartyId;

/// Everything party `index` holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyShare {
    pub index: PartyId,
    pub threshold: usize,
    pub parties: usize,
    pub epoch: u64,
    pub s1: PolyVec,
    pub s2: PolyVec,
    pub seeds: SeedBook,
}

impl PartyShare {
    /// Binding digest over the share and seed book, registered with the
    /// combiner so revealed material can be checked during blame.
    pub fn digest(&self) -> [u8; 32] {
        let mut seed_bytes = Vec::with_capacity(self.seeds.len() * 36);
        for ((a, b), s) in self.seeds.entries() {
            seed_bytes.extend_from_slice(&a.to_be_bytes());
            seed_bytes.extend_from_slice(&b.to_be_bytes());
            seed_bytes.extend_from_slice(s);
        }
        tagged_hash(
            tag::SHARE,
            &[&self.index.to_be_bytes(), &self.epoch.to_be_bytes(), &self.s1.to_bytes(), &self.s2.to_bytes(), &seed_bytes],
        )
    }
}

/// Public record of a threshold deployment held by the combiner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    pub threshold: usize,
    pub parties: usize,
    pub epoch: u64,
    pub digests: BTreeMap<PartyId, [u8; 32]>,
}

impl Registry {
    pub fn from_shares(shares: &[PartyShare]) -> Result<Self> {
        let first = shares.first().ok_or(Error::InsufficientShares { needed: 1, got: 0 })?;
        let mut digests = BTreeMap::new();
        for s in shares {
            if s.threshold != first.threshold || s.parties != first.parties || s.epoch != first.epoch {
                return Err(Error::Inconsistent("shares disagree on (T, N, epoch)"));
            }
            if digests.insert(s.index, s.digest()).is_some() {
                return Err(Error::DuplicateIndex(s.index));
            }
        }
        Ok(Self { threshold: first.threshold, parties: first.parties, epoch: first.epoch, digests })
    }
}

/// Output of a key generation run.
pub struct DealerOutput {
    pub public_key: PublicKey,
    pub registry: Registry,
    pub shares: Vec<PartyShare>,
    /// The dealer's copy of the full key; discard outside of tests.
    pub secret_key: SecretKey,
}

pub fn validate_threshold(t: usize, n: usize) -> Result<()> {
    if t == 0 || t > n || n > PartyId::MAX as usize {
        return Err(Error::InvalidThreshold { t, n });
    }
    Ok(())
}

/// Trusted-dealer key generation: an ML-DSA key pair whose `s1` and `s2`
/// are Shamir-shared among `n` parties with threshold `t`, plus pre-shared
/// pairwise mask seeds.
pub fn dealer_keygen<R: RngCore + CryptoRng>(t: usize, n: usize, rng: &mut R) -> Result<DealerOutput> {
    validate_threshold(t, n)?;
    let mut seed = [0u8; 32];
    rng.fill_bytes(&mut seed);
    let (public_key, secret_key) = mldsa::keygen(&seed);
    let s1_shares = shamir::share(&secret_key.s1, t, n, rng)?;
    let s2_shares = shamir::share(&secret_key.s2, t, n, rng)?;
    let books = DealerSeeds::new(rng).provision(n);
    let shares: Vec<PartyShare> = s1_shares
        .into_iter()
        .zip(s2_shares)
        .zip(books)
        .map(|((a, b), seeds)| PartyShare {
            index: a.party,
            threshold: t,
            parties: n,
            epoch: 0,
            s1: a.value,
            s2: b.value,
            seeds,
        })
        .collect();
    let registry = Registry::from_shares(&shares)?;
    Ok(DealerOutput { public_key, registry, shares, secret_key })
}

/// Interpolates `(s1, s2)` from a qualified set of shares.
pub fn reconstruct_secrets(shares: &[PartyShare]) -> Result<(PolyVec, PolyVec)> {
    let t = shares.first().map_or(1, |s| s.threshold);
    let s1: Vec<shamir::ShareOf> =
        shares.iter().map(|s| shamir::ShareOf { party: s.index, value: s.s1.clone() }).collect();
    let s2: Vec<shamir::ShareOf> =
        shares.iter().map(|s| shamir::ShareOf { party: s.index, value: s.s2.clone() }).collect();
    let s1 = shamir::reconstruct(&s1, t)?;
    let s2 = shamir::reconstruct(&s2, t)?;
    debug_assert_eq!((s1.dim(), s2.dim()), (L, K));
    Ok((s1, s2))
}
