//! Signer-side round logic.

use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::keys::PartyShare;
use super::messages::{commitment, nonce0, session_nonce, ChallengeMsg, CommitMsg, ResponseMsg, RevealMsg};
use crate::error::{Error, Result};
use crate::masking::{gen_mask, MaskDomain, MaskPurpose};
use crate::mldsa::sampling::sample_symmetric;
use crate::mldsa::{expand_a, sample_in_ball};
use crate::params::{GAMMA1, L};
use crate::ring::{reduce_i64, Matrix, Poly, PolyVec};
use crate::shamir::lagrange_coeffs;
use crate::PartyId;

/// Deviations a party can be made to commit, for testing accountability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Adds `delta` to the first coefficient of `U_i`.
    TamperResponse { delta: i64 },
    /// Sends a `W_i` that does not match the committed `w_i`.
    TamperCommitment,
    /// Declines to open its randomness when blame is requested.
    RefuseReveal,
}

/// Per-signer nonce range `floor(gamma1 / |S|)`.
pub fn nonce_bound(signers: usize) -> u32 {
    GAMMA1 / signers as u32
}

/// Expands a per-attempt seed into `(y_i, salt_i)`.
pub fn expand_attempt_seed(seed: &[u8; 32], signers: usize) -> (PolyVec, [u8; 32]) {
    let mut rng = ChaCha20Rng::from_seed(*seed);
    let y = sample_symmetric(&mut rng, L, nonce_bound(signers));
    let mut salt = [0u8; 32];
    rng.fill_bytes(&mut salt);
    (y, salt)
}

/// Material a party opens on the blame path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlameReveal {
    pub party: PartyId,
    pub share: PartyShare,
    /// Attempt index and the seed its `(y_i, salt_i)` were drawn from.
    pub attempt_seeds: Vec<(usize, [u8; 32])>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Stage {
    Idle,
    Committed,
    Revealed,
}

struct AttemptState {
    y: PolyVec,
    w: PolyVec,
    salt: [u8; 32],
}

/// One signer's state for a signing session.
pub struct PartySession {
    share: PartyShare,
    signers: Vec<PartyId>,
    lambda: u32,
    mu: Vec<u8>,
    a: Matrix,
    fault: Option<Fault>,
    stage: Stage,
    attempt: usize,
    current: Option<AttemptState>,
    seeds: Vec<(usize, [u8; 32])>,
}

impl PartySession {
    pub fn new(share: PartyShare, rho: &[u8; 32], signers: &[PartyId], mu: &[u8], fault: Option<Fault>) -> Result<Self> {
        let lagrange = lagrange_coeffs(signers)?;
        if lagrange.signers().len() < share.threshold + 1 {
            return Err(Error::SignerSetTooSmall { size: lagrange.signers().len(), t: share.threshold });
        }
        let lambda = lagrange.coeff(share.index).ok_or(Error::NotInSignerSet(share.index))?;
        Ok(Self {
            signers: lagrange.signers().to_vec(),
            share,
            lambda,
            mu: mu.to_vec(),
            a: expand_a(rho),
            fault,
            stage: Stage::Idle,
            attempt: 0,
            current: None,
            seeds: Vec::new(),
        })
    }

    pub fn index(&self) -> PartyId {
        self.share.index
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn signers(&self) -> &[PartyId] {
        &self.signers
    }

    /// Round 1: fresh `y_i`, `w_i = A y_i` and a commitment to both.
    pub fn round1<R: RngCore + CryptoRng>(&mut self, rng: &mut R) -> CommitMsg {
        self.attempt += 1;
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        self.seeds.push((self.attempt, seed));
        let (y, salt) = expand_attempt_seed(&seed, self.signers.len());
        let w = self.a.mul_vec(&y);
        let com = commitment(&y, &w, &salt);
        self.current = Some(AttemptState { y, w, salt });
        self.stage = Stage::Committed;
        CommitMsg { from: self.share.index, com }
    }

    /// Round 2: masked commitment once every signer's commitment is in.
    pub fn round2(&mut self, coms: &[CommitMsg]) -> Result<RevealMsg> {
        if self.stage != Stage::Committed {
            return Err(Error::State("round 2 before round 1"));
        }
        let by_party = collect_commitments(&self.signers, coms)?;
        let n0 = nonce0(&self.signers, &by_party);
        let dom = MaskDomain::new(MaskPurpose::Comm, &n0, &self.signers);
        let mask = gen_mask(self.share.index, &self.share.seeds, &dom)?;
        let st = self.current.as_ref().expect("committed");
        let mut w_masked = &st.w + &mask;
        if self.fault == Some(Fault::TamperCommitment) {
            bump(&mut w_masked, 1);
        }
        self.stage = Stage::Revealed;
        Ok(RevealMsg { from: self.share.index, w_masked, salt: st.salt })
    }

    /// Round 3: `U_i = y_i + lambda_i c s1_i + m_i` and `V_i = lambda_i c s2_i + m_i^(s2)`.
    pub fn round3(&mut self, ch: &ChallengeMsg) -> Result<ResponseMsg> {
        if self.stage != Stage::Revealed {
            return Err(Error::State("round 3 before round 2"));
        }
        let st = self.current.take().expect("revealed");
        self.stage = Stage::Idle;
        let (u, v) = response(&self.share, self.lambda, &self.signers, &self.mu, ch, &st.y)?;
        let mut u = u;
        if let Some(Fault::TamperResponse { delta }) = self.fault {
            bump(&mut u, delta);
        }
        Ok(ResponseMsg { from: self.share.index, u, v })
    }

    /// Opens share, seed book and per-attempt seeds, unless configured to refuse.
    pub fn reveal(&self) -> Option<BlameReveal> {
        if self.fault == Some(Fault::RefuseReveal) {
            return None;
        }
        Some(BlameReveal { party: self.share.index, share: self.share.clone(), attempt_seeds: self.seeds.clone() })
    }
}

fn bump(v: &mut PolyVec, delta: i64) {
    let p = &mut v.polys_mut()[0];
    let mut c = *p.coeffs();
    c[0] = reduce_i64(c[0] as i64 + delta);
    *p = Poly::from_coeffs(c);
}

pub(crate) fn collect_commitments(signers: &[PartyId], coms: &[CommitMsg]) -> Result<BTreeMap<PartyId, [u8; 32]>> {
    let mut by_party = BTreeMap::new();
    for m in coms {
        if !signers.contains(&m.from) {
            return Err(Error::NotInSignerSet(m.from));
        }
        if by_party.insert(m.from, m.com).is_some() {
            return Err(Error::DuplicateIndex(m.from));
        }
    }
    if let Some(&missing) = signers.iter().find(|i| !by_party.contains_key(i)) {
        return Err(Error::MissingMessage(missing));
    }
    Ok(by_party)
}

/// Honest round-3 values for a party; shared with the blame recomputation.
pub(crate) fn response(
    share: &PartyShare,
    lambda: u32,
    signers: &[PartyId],
    mu: &[u8],
    ch: &ChallengeMsg,
    y: &PolyVec,
) -> Result<(PolyVec, PolyVec)> {
    let c = sample_in_ball(&ch.c_tilde);
    let nonce = session_nonce(&c, mu, signers);
    let c_hat = c.scale(lambda).ntt();
    let m_resp = gen_mask(share.index, &share.seeds, &MaskDomain::new(MaskPurpose::Resp, &nonce, signers))?;
    let m_s2 = gen_mask(share.index, &share.seeds, &MaskDomain::new(MaskPurpose::S2, &nonce, signers))?;
    let u = &(y + &share.s1.mul_ntt(&c_hat)) + &m_resp;
    let v = &share.s2.mul_ntt(&c_hat) + &m_s2;
    Ok((u, v))
}
