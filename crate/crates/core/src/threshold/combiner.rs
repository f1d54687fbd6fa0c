//! The trusted combiner: aggregation, challenge derivation and the abort checks.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::messages::{session_nonce, AttemptRecord, ChallengeMsg, CommitMsg, ResponseMsg, RevealMsg};
use super::party::collect_commitments;
use crate::error::{Error, Result};
use crate::mldsa::{challenge_hash, sample_in_ball, verify, AbortKind, PublicKey, Signature};
use crate::mpc::{flatten, mpc_r0_check, IdealTwoParty, MpcConfig, TwoPartyBackend};
use crate::params::{GAMMA2, OMEGA, R0_BOUND, Z_BOUND};
use crate::ring::rounding::{high_bits_vec, low_bits_inf_norm, make_hint};
use crate::ring::{Matrix, Poly, PolyVec};
use crate::PartyId;

/// Where the r0-check runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Profile {
    /// Inside the trusted combiner.
    P1,
    /// As a multiparty computation among the signers.
    P2,
    /// Between two computation parties holding an additive split of `c s2`.
    P3,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::P1, Profile::P2, Profile::P3];
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(Self::P1),
            "p2" => Ok(Self::P2),
            "p3" => Ok(Self::P3),
            other => Err(format!("unknown profile {other:?}, expected p1, p2 or p3")),
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbortReason {
    pub kind: AbortKind,
    pub attempt: usize,
}

/// Result of combining one attempt.
#[derive(Clone, Debug)]
pub struct CombineOutcome {
    /// Whether the z-bound held, reported even when a later check fails.
    pub z_ok: bool,
    pub result: std::result::Result<Signature, AbortReason>,
}

/// Statistics of the distributed r0-check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MpcStats {
    pub runs: usize,
    pub rounds: usize,
    pub and_depth: usize,
    pub max_bytes_per_party: usize,
}

struct Derived {
    w: PolyVec,
    c_tilde: Vec<u8>,
    c: Poly,
}

pub struct Combiner {
    pk: PublicKey,
    a: Matrix,
    t1_shifted: Vec<crate::ring::NttPoly>,
    signers: Vec<PartyId>,
    mu: Vec<u8>,
    profile: Profile,
    attempt: usize,
    record: AttemptRecord,
    derived: Option<Derived>,
    #[cfg_attr(not(any(test, feature = "inspect")), allow(dead_code))]
    cs2: Option<PolyVec>,
    mpc: MpcStats,
}

impl Combiner {
    pub fn new(pk: &PublicKey, signers: &[PartyId], mu: &[u8], profile: Profile) -> Self {
        let mut signers = signers.to_vec();
        signers.sort_unstable();
        Self {
            a: pk.matrix(),
            t1_shifted: pk.t1_shifted().ntt(),
            pk: pk.clone(),
            signers,
            mu: mu.to_vec(),
            profile,
            attempt: 0,
            record: AttemptRecord::new(0),
            derived: None,
            cs2: None,
            mpc: MpcStats::default(),
        }
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn mpc_stats(&self) -> &MpcStats {
        &self.mpc
    }

    /// Starts a new attempt with the round-1 commitments.
    pub fn collect_commitments(&mut self, coms: Vec<CommitMsg>) -> Result<()> {
        let by_party = collect_commitments(&self.signers, &coms)?;
        self.attempt += 1;
        self.record = AttemptRecord::new(self.attempt);
        self.record.nonce0 = Some(super::messages::nonce0(&self.signers, &by_party));
        self.record.commitments = coms;
        self.record.commitments.sort_by_key(|m| m.from);
        self.derived = None;
        self.cs2 = None;
        Ok(())
    }

    /// Aggregates `W = sum W_i` and derives `(c_tilde, c, nonce)`.
    pub fn derive_challenge(&mut self, mut reveals: Vec<RevealMsg>) -> Result<ChallengeMsg> {
        reveals.sort_by_key(|m| m.from);
        check_senders(&self.signers, reveals.iter().map(|m| m.from))?;
        let w: PolyVec = reveals.iter().map(|m| &m.w_masked).sum::<Option<PolyVec>>().expect("non-empty signer set");
        let w1 = high_bits_vec(&w);
        let c_tilde = challenge_hash(&self.mu, &w1).to_vec();
        let c = sample_in_ball(&c_tilde);
        self.record.nonce = Some(session_nonce(&c, &self.mu, &self.signers));
        self.record.reveals = reveals;
        let msg = ChallengeMsg { c_tilde: c_tilde.clone() };
        self.record.challenge = Some(msg.clone());
        self.derived = Some(Derived { w, c_tilde, c });
        Ok(msg)
    }

    /// Aggregates the responses and runs z-bound, r0 and hint checks in order.
    pub fn combine<R: RngCore + CryptoRng>(&mut self, mut responses: Vec<ResponseMsg>, rng: &mut R) -> Result<CombineOutcome> {
        responses.sort_by_key(|m| m.from);
        check_senders(&self.signers, responses.iter().map(|m| m.from))?;
        let d = self.derived.take().ok_or(Error::State("combine before challenge"))?;
        let attempt = self.attempt;
        let abort = |kind| AbortReason { kind, attempt };

        let z: PolyVec = responses.iter().map(|m| &m.u).sum::<Option<PolyVec>>().expect("non-empty");
        let z_ok = z.inf_norm() < Z_BOUND;
        let outcome = if !z_ok {
            Err(abort(AbortKind::ZBound))
        } else if !self.r0_check(&d.w, &responses, rng)? {
            Err(abort(AbortKind::R0))
        } else {
            let cs2: PolyVec = responses.iter().map(|m| &m.v).sum::<Option<PolyVec>>().expect("non-empty");
            let c_hat = d.c.ntt();
            let ct1: Vec<_> = self.t1_shifted.iter().map(|t| t.pointwise(&c_hat)).collect();
            let r = &self.a.mul_vec(&z) - &PolyVec::from_ntt(&ct1);
            let ct0 = &(&r - &d.w) + &cs2;
            let h = make_hint(&(-&ct0), &r);
            self.cs2 = Some(cs2);
            if h.weight() > OMEGA || ct0.inf_norm() >= GAMMA2 {
                Err(abort(AbortKind::HintWeight))
            } else {
                let sig = Signature { c_tilde: d.c_tilde.clone(), z, h };
                if verify(&self.pk, &self.mu, &sig) {
                    Ok(sig)
                } else {
                    Err(abort(AbortKind::InvalidSignature))
                }
            }
        };
        self.derived = Some(d);
        self.record.responses = responses;
        self.record.outcome = Some(match &outcome {
            Ok(_) => super::messages::AttemptOutcome::Success,
            Err(a) => super::messages::AttemptOutcome::Aborted(a.kind),
        });
        Ok(CombineOutcome { z_ok, result: outcome })
    }

    fn r0_check<R: RngCore + CryptoRng>(&mut self, w: &PolyVec, responses: &[ResponseMsg], rng: &mut R) -> Result<bool> {
        match self.profile {
            Profile::P1 => {
                let cs2: PolyVec = responses.iter().map(|m| &m.v).sum::<Option<PolyVec>>().expect("non-empty");
                Ok(low_bits_inf_norm(&(w - &cs2)) < R0_BOUND)
            }
            Profile::P2 => {
                // party i contributes W_i - V_i; the masks cancel in the sum
                let inputs: Vec<Vec<u32>> = self
                    .record
                    .reveals
                    .iter()
                    .zip(responses)
                    .map(|(rv, rs)| flatten(&(&rv.w_masked - &rs.v)))
                    .collect();
                let out = mpc_r0_check(&inputs, &MpcConfig::default(), rng)?;
                self.mpc.runs += 1;
                self.mpc.rounds = out.rounds;
                self.mpc.and_depth = out.and_depth;
                self.mpc.max_bytes_per_party =
                    self.mpc.max_bytes_per_party.max(out.bytes_per_party.iter().copied().max().unwrap_or(0));
                Ok(out.pass)
            }
            Profile::P3 => {
                let half = responses.len().div_ceil(2);
                let sum = |ms: &[ResponseMsg]| ms.iter().map(|m| &m.v).sum::<Option<PolyVec>>();
                let s1 = sum(&responses[..half]).expect("non-empty");
                let s2 = sum(&responses[half..]).unwrap_or_else(|| PolyVec::zero(s1.dim()));
                Ok(IdealTwoParty.evaluate((w, &s1), &s2))
            }
        }
    }

    /// Messages seen during the latest attempt.
    pub fn record(&self) -> &AttemptRecord {
        &self.record
    }

    pub fn take_record(&mut self) -> AttemptRecord {
        std::mem::replace(&mut self.record, AttemptRecord::new(self.attempt))
    }

    /// `c s2` reconstructed in the latest attempt, for oracle tests.
    #[cfg(any(test, feature = "inspect"))]
    pub fn inspect_cs2(&self) -> Option<&PolyVec> {
        self.cs2.as_ref()
    }
}

fn check_senders(signers: &[PartyId], from: impl Iterator<Item = PartyId>) -> Result<()> {
    let got: Vec<PartyId> = from.collect();
    for w in got.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateIndex(w[0]));
        }
    }
    if let Some(&x) = got.iter().find(|i| !signers.contains(i)) {
        return Err(Error::NotInSignerSet(x));
    }
    if let Some(&missing) = signers.iter().find(|i| !got.contains(i)) {
        return Err(Error::MissingMessage(missing));
    }
    Ok(())
}
