//! Dealer-free key generation and proactive share refresh.
//!
//! Every party shares its own short `(s1^(i), s2^(i))`; the key is the sum of
//! all contributions. Refresh adds a fresh sharing of zero from every party.

use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::hash::shake256;
use crate::masking::{DealerSeeds, SeedProvisioning};
use crate::mldsa::sampling::sample_short;
use crate::mldsa::{expand_a, PublicKey};
use crate::params::{K, L};
use crate::ring::rounding::power2round_vec;
use crate::ring::PolyVec;
use crate::shamir::{self, ShareOf};
use crate::threshold::keys::validate_threshold;
use crate::threshold::{PartyShare, Registry};
use crate::PartyId;

/// What party `origin` sends: private shares point-to-point and `t^(i)` broadcast.
#[derive(Clone, Debug)]
pub struct Contribution {
    pub origin: PartyId,
    /// Broadcast share of the public matrix seed.
    pub rho_part: [u8; 32],
    pub s1: PolyVec,
    pub s2: PolyVec,
    pub s1_shares: Vec<ShareOf>,
    pub s2_shares: Vec<ShareOf>,
    /// `t^(i) = A s1^(i) + s2^(i)` under the joint matrix.
    pub t: Option<PolyVec>,
}

impl Contribution {
    pub fn new<R: RngCore + CryptoRng>(origin: PartyId, t: usize, n: usize, rng: &mut R) -> Result<Self> {
        let mut rho_part = [0u8; 32];
        rng.fill_bytes(&mut rho_part);
        let s1 = sample_short(rng, L);
        let s2 = sample_short(rng, K);
        let s1_shares = shamir::share(&s1, t, n, rng)?;
        let s2_shares = shamir::share(&s2, t, n, rng)?;
        Ok(Self { origin, rho_part, s1, s2, s1_shares, s2_shares, t: None })
    }
}

/// Output of a DKG run.
pub struct DkgOutput {
    pub public_key: PublicKey,
    pub registry: Registry,
    pub shares: Vec<PartyShare>,
    pub contributions: Vec<Contribution>,
    /// `||s1||_inf` of the aggregate, for comparison with `eta`.
    pub s1_norm: u32,
    pub s2_norm: u32,
}

/// Joint matrix seed from every party's broadcast part.
pub fn joint_rho(parts: &[[u8; 32]]) -> [u8; 32] {
    let refs: Vec<&[u8]> = parts.iter().map(|p| p.as_slice()).collect();
    let mut rho = [0u8; 32];
    shake256(&refs, &mut rho);
    rho
}

pub fn dkg<R: RngCore + CryptoRng>(n: usize, t: usize, rng: &mut R) -> Result<DkgOutput> {
    validate_threshold(t, n)?;
    let mut contributions =
        (1..=n as PartyId).map(|i| Contribution::new(i, t, n, rng)).collect::<Result<Vec<_>>>()?;
    let rho = joint_rho(&contributions.iter().map(|c| c.rho_part).collect::<Vec<_>>());
    let a = expand_a(&rho);
    for c in &mut contributions {
        c.t = Some(&a.mul_vec(&c.s1) + &c.s2);
    }

    let books = DealerSeeds::new(rng).provision(n);
    let mut shares = Vec::with_capacity(n);
    for (j, seeds) in (1..=n as PartyId).zip(books) {
        let pick = |f: fn(&Contribution) -> &[ShareOf]| -> Result<PolyVec> {
            contributions
                .iter()
                .map(|c| f(c).iter().find(|s| s.party == j).map(|s| &s.value))
                .sum::<Option<Option<PolyVec>>>()
                .flatten()
                .ok_or(Error::MissingMessage(j))
        };
        let s1 = pick(|c| &c.s1_shares)?;
        let s2 = pick(|c| &c.s2_shares)?;
        shares.push(PartyShare { index: j, threshold: t, parties: n, epoch: 0, s1, s2, seeds });
    }

    let s1: PolyVec = contributions.iter().map(|c| &c.s1).sum::<Option<PolyVec>>().expect("n >= 1");
    let s2: PolyVec = contributions.iter().map(|c| &c.s2).sum::<Option<PolyVec>>().expect("n >= 1");
    let t_sum: PolyVec =
        contributions.iter().map(|c| c.t.as_ref().expect("set above")).sum::<Option<PolyVec>>().expect("n >= 1");
    if t_sum != &a.mul_vec(&s1) + &s2 {
        return Err(Error::Inconsistent("broadcast contributions do not sum to the public key"));
    }
    let t1 = power2round_vec(&t_sum).0;
    let registry = Registry::from_shares(&shares)?;
    Ok(DkgOutput {
        public_key: PublicKey::new(rho, t1),
        registry,
        shares,
        s1_norm: s1.inf_norm(),
        s2_norm: s2.inf_norm(),
        contributions,
    })
}

/// Adds a sharing of zero from every party and advances the epoch. Seed
/// books carry over.
pub fn refresh<R: RngCore + CryptoRng>(shares: &[PartyShare], rng: &mut R) -> Result<(Vec<PartyShare>, Registry)> {
    let first = shares.first().ok_or(Error::InsufficientShares { needed: 1, got: 0 })?;
    let (t, n, epoch) = (first.threshold, first.parties, first.epoch);
    if shares.len() != n {
        return Err(Error::InsufficientShares { needed: n, got: shares.len() });
    }
    let mut next = shares.to_vec();
    next.sort_by_key(|s| s.index);
    for (k, s) in next.iter().enumerate() {
        if s.index as usize != k + 1 || s.threshold != t || s.parties != n || s.epoch != epoch {
            return Err(Error::Inconsistent("refresh needs every share of one epoch"));
        }
    }
    for _ in 0..n {
        let z1 = shamir::share(&PolyVec::zero(L), t, n, rng)?;
        let z2 = shamir::share(&PolyVec::zero(K), t, n, rng)?;
        for ((s, a), b) in next.iter_mut().zip(z1).zip(z2) {
            s.s1 += &a.value;
            s.s2 += &b.value;
        }
    }
    for s in &mut next {
        s.epoch = epoch + 1;
    }
    let registry = Registry::from_shares(&next)?;
    Ok((next, registry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mldsa::keypair_from_secrets;
    use crate::params::ETA;
    use crate::threshold::reconstruct_secrets;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn aggregate_matches_dealer_mode_key() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = dkg(5, 3, &mut rng).unwrap();
        let (s1, s2) = reconstruct_secrets(&out.shares[1..4]).unwrap();
        let sum1: PolyVec = out.contributions.iter().map(|c| &c.s1).sum::<Option<PolyVec>>().unwrap();
        assert_eq!(s1, sum1);
        let (pk, _) = keypair_from_secrets(out.public_key.rho, s1, s2);
        assert_eq!(pk, out.public_key);
        assert!(out.s1_norm <= 5 * ETA && out.s2_norm <= 5 * ETA);
    }

    #[test]
    fn refresh_preserves_secret_and_bumps_epoch() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = dkg(4, 2, &mut rng).unwrap();
        let before = reconstruct_secrets(&out.shares[..2]).unwrap();
        let (mut cur, _) = refresh(&out.shares, &mut rng).unwrap();
        let (cur2, reg) = refresh(&cur, &mut rng).unwrap();
        assert_ne!(cur[0].s1, cur2[0].s1);
        cur = cur2;
        assert_eq!(reg.epoch, 2);
        assert_eq!(reconstruct_secrets(&cur[2..]).unwrap(), before);
        assert_eq!(reconstruct_secrets(&[cur[0].clone(), cur[3].clone()]).unwrap(), before);
    }

    #[test]
    fn mixed_epochs_do_not_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = dkg(5, 3, &mut rng).unwrap();
        let secret = reconstruct_secrets(&out.shares[..3]).unwrap();
        let (new, _) = refresh(&out.shares, &mut rng).unwrap();
        let mixed = vec![out.shares[0].clone(), new[1].clone(), new[2].clone()];
        assert_ne!(reconstruct_secrets(&mixed).unwrap(), secret);
    }

    #[test]
    fn refresh_rejects_partial_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let out = dkg(4, 2, &mut rng).unwrap();
        assert!(refresh(&out.shares[..3], &mut rng).is_err());
    }
}
