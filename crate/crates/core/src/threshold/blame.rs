//! Accountability: recompute every signer's messages from opened material.

use std::collections::BTreeSet;

use super::keys::Registry;
use super::messages::{commitment, AttemptRecord};
use super::party::{expand_attempt_seed, response, BlameReveal};
use crate::masking::{gen_mask, MaskDomain, MaskPurpose};
use crate::mldsa::expand_a;
use crate::shamir::lagrange_coeffs;
use crate::PartyId;

/// Returns the signers whose recorded messages are inconsistent with what
/// they open, plus those who refuse to open. Only identities are output.
pub fn blame(
    registry: &Registry,
    rho: &[u8; 32],
    signers: &[PartyId],
    mu: &[u8],
    attempts: &[AttemptRecord],
    reveals: &[(PartyId, Option<BlameReveal>)],
) -> Vec<PartyId> {
    let mut cheaters = BTreeSet::new();
    let Ok(lagrange) = lagrange_coeffs(signers) else {
        return Vec::new();
    };
    let signers = lagrange.signers();
    let a = expand_a(rho);
    for &i in signers {
        let Some(Some(rev)) = reveals.iter().find(|(p, _)| *p == i).map(|(_, r)| r) else {
            cheaters.insert(i);
            continue;
        };
        if rev.party != i || rev.share.index != i || registry.digests.get(&i) != Some(&rev.share.digest()) {
            cheaters.insert(i);
            continue;
        }
        let lambda = lagrange.coeff(i).expect("signer");
        if !attempts.iter().all(|rec| attempt_consistent(i, rev, lambda, signers, mu, &a, rec)) {
            cheaters.insert(i);
        }
    }
    cheaters.into_iter().collect()
}

fn attempt_consistent(
    i: PartyId,
    rev: &BlameReveal,
    lambda: u32,
    signers: &[PartyId],
    mu: &[u8],
    a: &crate::ring::Matrix,
    rec: &AttemptRecord,
) -> bool {
    let Some(&(_, seed)) = rev.attempt_seeds.iter().find(|(n, _)| *n == rec.attempt) else {
        return false;
    };
    let (y, salt) = expand_attempt_seed(&seed, signers.len());
    let w = a.mul_vec(&y);
    let Some(com) = rec.commitments.iter().find(|m| m.from == i) else {
        return false;
    };
    if com.com != commitment(&y, &w, &salt) {
        return false;
    }
    let (Some(n0), Some(reveal)) = (rec.nonce0, rec.reveals.iter().find(|m| m.from == i)) else {
        // the attempt stopped before round 2; nothing more to check
        return true;
    };
    let Ok(mask) = gen_mask(i, &rev.share.seeds, &MaskDomain::new(MaskPurpose::Comm, &n0, signers)) else {
        return false;
    };
    if reveal.salt != salt || reveal.w_masked != &w + &mask {
        return false;
    }
    let (Some(ch), Some(resp)) = (rec.challenge.as_ref(), rec.responses.iter().find(|m| m.from == i)) else {
        return true;
    };
    match response(&rev.share, lambda, signers, mu, ch, &y) {
        Ok((u, v)) => resp.u == u && resp.v == v,
        Err(_) => false,
    }
}
