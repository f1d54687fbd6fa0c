//! Protocol messages, the hashes binding them together, and the session
//! transcript used for record/replay.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::hash::{tag, tagged_hash};
use crate::mldsa::AbortKind;
use crate::params::{C_TILDE_BYTES, K, L, N};
use crate::ring::{Poly, PolyVec};
use crate::PartyId;

const POLY_WIRE_BYTES: usize = N * 3;

/// Round 1: commitment to `(y_i, w_i, r_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitMsg {
    pub from: PartyId,
    pub com: [u8; 32],
}

/// Round 2: masked commitment `W_i = w_i + m_i^(w)` and the salt `r_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealMsg {
    pub from: PartyId,
    pub w_masked: PolyVec,
    pub salt: [u8; 32],
}

/// Combiner broadcast between rounds 2 and 3.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengeMsg {
    pub c_tilde: Vec<u8>,
}

/// Round 3: masked response `U_i` and masked `c * s2` contribution `V_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseMsg {
    pub from: PartyId,
    pub u: PolyVec,
    pub v: PolyVec,
}

impl CommitMsg {
    pub const WIRE_BYTES: usize = 32;
}

impl RevealMsg {
    pub const WIRE_BYTES: usize = K * POLY_WIRE_BYTES + 32;
}

impl ChallengeMsg {
    pub const WIRE_BYTES: usize = C_TILDE_BYTES;
}

impl ResponseMsg {
    pub const WIRE_BYTES: usize = (L + K) * POLY_WIRE_BYTES;
}

/// Bytes one party sends per attempt.
pub const PARTY_BYTES_PER_ATTEMPT: usize = CommitMsg::WIRE_BYTES + RevealMsg::WIRE_BYTES + ResponseMsg::WIRE_BYTES;

pub(crate) fn signer_bytes(signers: &[PartyId]) -> Vec<u8> {
    signers.iter().flat_map(|i| i.to_be_bytes()).collect()
}

pub fn commitment(y: &PolyVec, w: &PolyVec, salt: &[u8; 32]) -> [u8; 32] {
    tagged_hash(tag::COMMIT, &[&y.to_bytes(), &w.to_bytes(), salt])
}

/// `nonce0 = H("nonce0" || S || Com_i ...)` with commitments in ascending party order.
pub fn nonce0(signers: &[PartyId], coms: &BTreeMap<PartyId, [u8; 32]>) -> [u8; 32] {
    let s = signer_bytes(signers);
    let mut parts: Vec<&[u8]> = vec![&s];
    for com in coms.values() {
        parts.push(com);
    }
    tagged_hash(tag::NONCE0, &parts)
}

/// `nonce = H("nonce" || c || mu || sort(S))`.
pub fn session_nonce(c: &Poly, mu: &[u8], signers: &[PartyId]) -> [u8; 32] {
    let c_bytes = PolyVec::from_polys(vec![c.clone()]).to_bytes();
    tagged_hash(tag::NONCE, &[&c_bytes, mu, &signer_bytes(signers)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttemptOutcome {
    Success,
    Aborted(AbortKind),
}

/// Everything the combiner saw during one attempt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    pub commitments: Vec<CommitMsg>,
    pub nonce0: Option<[u8; 32]>,
    pub reveals: Vec<RevealMsg>,
    pub challenge: Option<ChallengeMsg>,
    pub nonce: Option<[u8; 32]>,
    pub responses: Vec<ResponseMsg>,
    pub outcome: Option<AttemptOutcome>,
}

impl AttemptRecord {
    pub fn new(attempt: usize) -> Self {
        Self {
            attempt,
            commitments: Vec::new(),
            nonce0: None,
            reveals: Vec::new(),
            challenge: None,
            nonce: None,
            responses: Vec::new(),
            outcome: None,
        }
    }
}

/// Recorded message flow of a signing session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub signers: Vec<PartyId>,
    pub message: Vec<u8>,
    pub attempts: Vec<AttemptRecord>,
}

impl SessionTranscript {
    pub fn new(signers: &[PartyId], message: &[u8]) -> Self {
        Self { signers: signers.to_vec(), message: message.to_vec(), attempts: Vec::new() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Total bytes sent by each party over the session.
    pub fn bytes_per_party(&self) -> BTreeMap<PartyId, usize> {
        let mut out = BTreeMap::new();
        for a in &self.attempts {
            for m in &a.commitments {
                *out.entry(m.from).or_default() += CommitMsg::WIRE_BYTES;
            }
            for m in &a.reveals {
                *out.entry(m.from).or_default() += RevealMsg::WIRE_BYTES;
            }
            for m in &a.responses {
                *out.entry(m.from).or_default() += ResponseMsg::WIRE_BYTES;
            }
        }
        out
    }
}
