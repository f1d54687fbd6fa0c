//! Three-round threshold signing with a trusted combiner.
//!
//! Round 1: each signer commits to a fresh nonce share `y_i` and `w_i = A y_i`.
//! Round 2: once all commitments are in, each signer sends `W_i = w_i + m_i`
//! under commitment masks; the combiner sums them, derives the challenge and
//! broadcasts `c_tilde`.
//! Round 3: each signer sends `U_i = y_i + lambda_i c s1_i + m_i` and
//! `V_i = lambda_i c s2_i + m_i'`. Masks cancel, so `sum U_i = y + c s1` and
//! `sum V_i = c s2`; the combiner runs the aborts and emits a plain
//! ML-DSA signature.

pub mod blame;
pub mod combiner;
pub mod keys;
pub mod messages;
pub mod party;

use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::mldsa::{PublicKey, Signature, DEFAULT_RETRY_CAP};
use crate::shamir::normalize_set;
use crate::PartyId;

pub use blame::blame;
pub use combiner::{AbortReason, CombineOutcome, Combiner, MpcStats, Profile};
pub use keys::{dealer_keygen, reconstruct_secrets, DealerOutput, PartyShare, Registry};
pub use messages::{AttemptOutcome, AttemptRecord, SessionTranscript, PARTY_BYTES_PER_ATTEMPT};
pub use party::{nonce_bound, BlameReveal, Fault, PartySession};

/// Default number of consecutive aborts that opens the blame path.
pub const DEFAULT_BLAME_AFTER: usize = 30;

#[derive(Clone, Debug)]
pub struct SignConfig {
    pub retry_cap: usize,
    /// Consecutive aborts before blame runs; 0 disables blame.
    pub blame_after: usize,
    pub profile: Profile,
    pub record_transcript: bool,
    /// Injected misbehavior, keyed by party.
    pub faults: BTreeMap<PartyId, Fault>,
}

impl Default for SignConfig {
    fn default() -> Self {
        Self {
            retry_cap: DEFAULT_RETRY_CAP,
            blame_after: DEFAULT_BLAME_AFTER,
            profile: Profile::P1,
            record_transcript: false,
            faults: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SignReport {
    pub signature: Signature,
    pub attempts: usize,
    pub aborts: Vec<AbortReason>,
    /// Attempts whose aggregated `z` passed the norm bound.
    pub z_passes: usize,
    pub blame_runs: usize,
    pub mpc: MpcStats,
    pub transcript: Option<SessionTranscript>,
}

/// All roles of one signing session, run in-process with barrier rounds.
pub struct SigningSession {
    parties: Vec<PartySession>,
    combiner: Combiner,
    registry: Registry,
    rho: [u8; 32],
    signers: Vec<PartyId>,
    mu: Vec<u8>,
    streak: Vec<AttemptRecord>,
    transcript: Option<SessionTranscript>,
}

impl SigningSession {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        pk: &PublicKey,
        registry: &Registry,
        shares: &[PartyShare],
        signers: &[PartyId],
        mu: &[u8],
        profile: Profile,
        faults: &BTreeMap<PartyId, Fault>,
        record_transcript: bool,
    ) -> Result<Self> {
        let signers = normalize_set(signers)?;
        if signers.len() < registry.threshold + 1 {
            return Err(Error::SignerSetTooSmall { size: signers.len(), t: registry.threshold });
        }
        let parties = signers
            .iter()
            .map(|&i| {
                let share = shares.iter().find(|s| s.index == i).ok_or(Error::MissingMessage(i))?;
                PartySession::new(share.clone(), &pk.rho, &signers, mu, faults.get(&i).copied())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            parties,
            combiner: Combiner::new(pk, &signers, mu, profile),
            registry: registry.clone(),
            rho: pk.rho,
            transcript: record_transcript.then(|| SessionTranscript::new(&signers, mu)),
            signers,
            mu: mu.to_vec(),
            streak: Vec::new(),
        })
    }

    pub fn signers(&self) -> &[PartyId] {
        &self.signers
    }

    pub fn combiner(&self) -> &Combiner {
        &self.combiner
    }

    pub fn parties(&self) -> &[PartySession] {
        &self.parties
    }

    /// One full attempt of all three rounds.
    pub fn attempt<R: RngCore + CryptoRng>(&mut self, rng: &mut R) -> Result<CombineOutcome> {
        let coms: Vec<_> = self.parties.iter_mut().map(|p| p.round1(rng)).collect();
        self.combiner.collect_commitments(coms.clone())?;
        let reveals = self.parties.iter_mut().map(|p| p.round2(&coms)).collect::<Result<Vec<_>>>()?;
        let ch = self.combiner.derive_challenge(reveals)?;
        let responses = self.parties.iter_mut().map(|p| p.round3(&ch)).collect::<Result<Vec<_>>>()?;
        let outcome = self.combiner.combine(responses, rng)?;
        let record = self.combiner.take_record();
        if let Some(t) = self.transcript.as_mut() {
            t.attempts.push(record.clone());
        }
        self.streak.push(record);
        Ok(outcome)
    }

    /// Runs blame over the attempts since the last blame run.
    pub fn blame(&mut self) -> Vec<PartyId> {
        let reveals: Vec<_> = self.parties.iter().map(|p| (p.index(), p.reveal())).collect();
        let out = blame::blame(&self.registry, &self.rho, &self.signers, &self.mu, &self.streak, &reveals);
        self.streak.clear();
        out
    }

    pub fn into_transcript(self) -> Option<SessionTranscript> {
        self.transcript
    }
}

/// Retries full attempts until a signature passes, the retry cap is hit, or
/// blame identifies a cheater.
pub fn sign_threshold<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    registry: &Registry,
    shares: &[PartyShare],
    signers: &[PartyId],
    mu: &[u8],
    cfg: &SignConfig,
    rng: &mut R,
) -> Result<SignReport> {
    let mut session =
        SigningSession::new(pk, registry, shares, signers, mu, cfg.profile, &cfg.faults, cfg.record_transcript)?;
    let mut aborts = Vec::new();
    let mut z_passes = 0;
    let mut consecutive = 0;
    let mut blame_runs = 0;
    for attempt in 1..=cfg.retry_cap {
        let outcome = session.attempt(rng)?;
        z_passes += outcome.z_ok as usize;
        match outcome.result {
            Ok(signature) => {
                log::debug!("signature after {attempt} attempts");
                let mpc = session.combiner().mpc_stats().clone();
                return Ok(SignReport {
                    signature,
                    attempts: attempt,
                    aborts,
                    z_passes,
                    blame_runs,
                    mpc,
                    transcript: session.into_transcript(),
                });
            }
            Err(reason) => {
                log::trace!("attempt {attempt} aborted: {:?}", reason.kind);
                aborts.push(reason);
                consecutive += 1;
                if cfg.blame_after > 0 && consecutive >= cfg.blame_after {
                    blame_runs += 1;
                    consecutive = 0;
                    let cheaters = session.blame();
                    if !cheaters.is_empty() {
                        log::warn!("blame identified {cheaters:?}");
                        return Err(Error::Blame(cheaters));
                    }
                }
            }
        }
    }
    Err(Error::RetryLimit(cfg.retry_cap))
}
