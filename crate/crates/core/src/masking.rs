//! Pairwise seed books and pairwise-canceling masks.
//!
//! For a signer set `S`, party `i` adds `PRF(seed_{i,j}, dom)` for every
//! `j > i` and subtracts `PRF(seed_{j,i}, dom)` for every `j < i`. Each pair
//! contributes `+x` and `-x`, so the masks of `S` sum to zero in `R_q^d`.

use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::{tag, TaggedXof};
use crate::mldsa::sampling::rej_uniform;
use crate::params::{K, L};
use crate::ring::{Poly, PolyVec};
use crate::PartyId;

pub type Seed = [u8; 32];

/// Seeds shared between one party and every other party.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedBook {
    owner: PartyId,
    seeds: BTreeMap<(PartyId, PartyId), Seed>,
}

fn pair_key(a: PartyId, b: PartyId) -> (PartyId, PartyId) {
    (a.min(b), a.max(b))
}

impl SeedBook {
    pub fn new(owner: PartyId) -> Self {
        Self { owner, seeds: BTreeMap::new() }
    }

    pub fn owner(&self) -> PartyId {
        self.owner
    }

    pub fn insert(&mut self, other: PartyId, seed: Seed) {
        assert_ne!(other, self.owner, "no seed with oneself");
        self.seeds.insert(pair_key(self.owner, other), seed);
    }

    pub fn seed_with(&self, other: PartyId) -> Result<&Seed> {
        self.seeds.get(&pair_key(self.owner, other)).ok_or(Error::MissingSeed(self.owner, other))
    }

    pub fn entries(&self) -> impl Iterator<Item = ((PartyId, PartyId), &Seed)> {
        self.seeds.iter().map(|(&k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    /// Restricts the book to pairs inside `set`.
    pub fn restricted_to(&self, set: &[PartyId]) -> SeedBook {
        let seeds = self
            .seeds
            .iter()
            .filter(|((a, b), _)| set.contains(a) && set.contains(b))
            .map(|(&k, &v)| (k, v))
            .collect();
        SeedBook { owner: self.owner, seeds }
    }
}

/// Establishes pairwise seeds for parties `1..=n`.
pub trait SeedProvisioning {
    fn provision(&mut self, n: usize) -> Vec<SeedBook>;
}

/// Pre-shared keys handed out by a trusted setup.
pub struct DealerSeeds<'a, R> {
    rng: &'a mut R,
}

impl<'a, R: RngCore + CryptoRng> DealerSeeds<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        Self { rng }
    }
}

impl<R: RngCore + CryptoRng> SeedProvisioning for DealerSeeds<'_, R> {
    fn provision(&mut self, n: usize) -> Vec<SeedBook> {
        let mut books: Vec<SeedBook> = (1..=n as PartyId).map(SeedBook::new).collect();
        for i in 1..=n as PartyId {
            for j in i + 1..=n as PartyId {
                let mut seed = [0u8; 32];
                self.rng.fill_bytes(&mut seed);
                books[i as usize - 1].insert(j, seed);
                books[j as usize - 1].insert(i, seed);
            }
        }
        books
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaskPurpose {
    /// Response masks on `U_i`, dimension `l`.
    Resp,
    /// Commitment masks on `W_i`, dimension `k`.
    Comm,
    /// Masks on the `c * s2` contribution `V_i`, dimension `k`.
    S2,
}

impl MaskPurpose {
    pub const ALL: [MaskPurpose; 3] = [MaskPurpose::Resp, MaskPurpose::Comm, MaskPurpose::S2];

    pub fn tag(self) -> &'static str {
        match self {
            Self::Resp => tag::RESP,
            Self::Comm => tag::COMM,
            Self::S2 => tag::S2,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::Resp => L,
            Self::Comm | Self::S2 => K,
        }
    }
}

/// Domain separator: purpose, session nonce and the sorted signer set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskDomain {
    purpose: MaskPurpose,
    nonce: Vec<u8>,
    signers: Vec<PartyId>,
}

impl MaskDomain {
    pub fn new(purpose: MaskPurpose, nonce: &[u8], signers: &[PartyId]) -> Self {
        let mut signers = signers.to_vec();
        signers.sort_unstable();
        signers.dedup();
        Self { purpose, nonce: nonce.to_vec(), signers }
    }

    pub fn purpose(&self) -> MaskPurpose {
        self.purpose
    }

    pub fn dim(&self) -> usize {
        self.purpose.dim()
    }

    pub fn signers(&self) -> &[PartyId] {
        &self.signers
    }

    fn signer_bytes(&self) -> Vec<u8> {
        self.signers.iter().flat_map(|i| i.to_be_bytes()).collect()
    }
}

/// Expands `seed` under `dom` into a uniform vector of dimension `dom.dim()`.
///
/// Every polynomial is drawn from its own XOF instance keyed by its index and
/// the target dimension.
pub fn prf_expand(seed: &Seed, dom: &MaskDomain) -> PolyVec {
    let signers = dom.signer_bytes();
    let dim = (dom.dim() as u32).to_be_bytes();
    let polys = (0..dom.dim() as u32)
        .map(|idx| {
            let mut xof = TaggedXof::new(dom.purpose.tag(), &[seed, &dom.nonce, &signers, &dim, &idx.to_be_bytes()]);
            Poly::from_coeffs(rej_uniform(&mut xof))
        })
        .collect();
    PolyVec::from_polys(polys)
}

/// Pairwise-canceling mask of party `i` for the signer set in `dom`.
pub fn gen_mask(i: PartyId, book: &SeedBook, dom: &MaskDomain) -> Result<PolyVec> {
    if !dom.signers.contains(&i) {
        return Err(Error::NotInSignerSet(i));
    }
    let mut mask = PolyVec::zero(dom.dim());
    for &j in &dom.signers {
        if j == i {
            continue;
        }
        let stream = prf_expand(book.seed_with(j)?, dom);
        if j > i {
            mask += &stream;
        } else {
            mask -= &stream;
        }
    }
    Ok(mask)
}
