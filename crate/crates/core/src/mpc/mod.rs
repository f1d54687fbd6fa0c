//! The r0-check as a secure computation, simulated in-process.
//!
//! Parties hold additive shares of `w' = w - c*s2` over `Z_q^m`. The online
//! phase authenticates the inputs, opens `w' + r` for an edaBit mask `r`,
//! converts back to binary shares, evaluates the coefficient predicate with
//! Beaver AND gates, and opens only the conjunction. Preprocessing (MAC key,
//! input masks, edaBits, AND triples) comes from a trusted dealer.
//!
//! Logical rounds:
//!
//! | round | content |
//! |-------|---------|
//! | 1 | authenticated input broadcast `x_i - r_i` |
//! | 2 | echo of the input broadcasts |
//! | 3 | commitments to shares of `w' + r` |
//! | 4 | openings of those shares |
//! | 5 | binary subtraction `(w' + r) - r`, MAC-check commitments |
//! | 6 | centering and reduction mod `2*gamma2` |
//! | 7 | window comparison against the bound |
//! | 8 | AND tree, result and MAC-check openings |
//!
//! Rounds 5 to 8 each contain several AND layers; the sequential layer count
//! is reported separately as the AND depth.

pub mod arith;
pub mod binary;
pub mod circuits;
pub mod edabits;
pub mod p3;
pub mod transcript;

use rand::{CryptoRng, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::hash::{tag, tagged_hash};
use crate::params::{GAMMA2, Q, R0_BOUND};
use crate::ring::rounding::ALPHA;
use crate::ring::{mul_mod, PolyVec};
use arith::{combine, AuthVec, MacKey};
use binary::{BinaryEngine, SharedBits, TriplePool};
use edabits::gen_edabits;
use transcript::{field_bytes, MpcTranscript, MsgKind, Payload};

pub use p3::{p3_check, IdealTwoParty, TwoPartyBackend};

/// Online rounds of the protocol.
pub const ONLINE_ROUNDS: usize = 8;

/// Misbehavior of one party during the masked reveal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpcFault {
    /// Opens a share different from the one it committed to.
    Equivocate { party: usize },
    /// Adds `delta` to its share before committing; only the MAC check can notice.
    AdditiveTamper { party: usize, delta: u32 },
}

#[derive(Clone, Debug)]
pub struct MpcConfig {
    pub bound: u32,
    /// Available single-bit AND triples; `None` is unbounded.
    pub triple_capacity: Option<u64>,
    pub fault: Option<MpcFault>,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self { bound: R0_BOUND, triple_capacity: None, fault: None }
    }
}

#[derive(Clone, Debug)]
pub struct MpcOutput {
    pub pass: bool,
    pub rounds: usize,
    pub and_depth: usize,
    pub and_gates: u64,
    pub bytes_per_party: Vec<usize>,
    pub edabit_resamples: u64,
    pub transcript: MpcTranscript,
}

/// Plaintext coefficient predicate: `|w~ mod 2*gamma2| < bound`, where `w~` is
/// the centered representative of `w` and the residue is taken in `[-gamma2, gamma2)`.
pub fn plaintext_pass(w: u32, bound: u32) -> bool {
    let centered = if w > (Q - 1) / 2 { w as i64 - Q as i64 } else { w as i64 };
    let mut r = centered.rem_euclid(ALPHA as i64);
    if r >= GAMMA2 as i64 {
        r -= ALPHA as i64;
    }
    r.abs() < bound as i64
}

pub fn plaintext_r0_check(w_prime: &[u32], bound: u32) -> bool {
    w_prime.iter().all(|&w| plaintext_pass(w, bound))
}

/// Flattens a polynomial vector into `Z_q^m`.
pub fn flatten(v: &PolyVec) -> Vec<u32> {
    v.coeffs().collect()
}

fn field_to_bytes(v: &[u32]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()[..3].to_vec()).collect()
}

fn open_commitment(sid: &[u8; 32], party: usize, label: &[u8], values: &[u32]) -> [u8; 32] {
    tagged_hash(tag::MPC_OPEN, &[sid, label, &(party as u32).to_be_bytes(), &field_to_bytes(values)])
}

/// Commit-then-open of an authenticated vector. Returns the opened value.
pub fn masked_open(
    masked: &AuthVec,
    sid: &[u8; 32],
    fault: Option<MpcFault>,
    transcript: &mut MpcTranscript,
) -> Result<Vec<u32>> {
    let n = masked.parties();
    let m = masked.len();
    let committed: Vec<Vec<u32>> = (0..n).map(|p| masked.party_share(p).to_vec()).collect();
    let coms: Vec<[u8; 32]> = committed.iter().enumerate().map(|(p, s)| open_commitment(sid, p, b"masked", s)).collect();
    for (p, c) in coms.iter().enumerate() {
        transcript.push(3, p, MsgKind::OpenCommit, 32, Payload::Digest(*c));
    }
    let mut revealed = committed;
    if let Some(MpcFault::Equivocate { party }) = fault {
        revealed[party][0] = (revealed[party][0] + 1) % Q;
    }
    for (p, s) in revealed.iter().enumerate() {
        transcript.push(4, p, MsgKind::OpenShare, field_bytes(m), Payload::Field(s.clone()));
    }
    for (p, s) in revealed.iter().enumerate() {
        if open_commitment(sid, p, b"masked", s) != coms[p] {
            return Err(Error::MpcAbort(format!("opening of party {p} does not match its commitment")));
        }
    }
    Ok(combine(&revealed))
}

/// Runs the r0-check on additive input shares `inputs[party][coefficient]`.
pub fn mpc_r0_check<R: RngCore + CryptoRng>(inputs: &[Vec<u32>], cfg: &MpcConfig, rng: &mut R) -> Result<MpcOutput> {
    let n = inputs.len();
    let m = inputs.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || inputs.iter().any(|v| v.len() != m) {
        return Err(Error::State("r0-check inputs must be non-empty and of equal length"));
    }

    // preprocessing
    let key = MacKey::random(n, rng);
    let input_masks: Vec<Vec<u32>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(0..Q)).collect()).collect();
    let auth_masks: Vec<AuthVec> = input_masks.iter().map(|r| AuthVec::deal(r, &key, rng)).collect();
    let eda = gen_edabits(m, &key, rng);
    let mut pool_seed = [0u8; 32];
    rng.fill_bytes(&mut pool_seed);
    let mut pool = TriplePool::new(pool_seed, cfg.triple_capacity);
    let mut sid = [0u8; 32];
    rng.fill_bytes(&mut sid);
    let mut tr = MpcTranscript::default();

    // rounds 1-2: authenticated inputs, summed locally
    let mut w_auth: Option<AuthVec> = None;
    let mut echo_parts: Vec<Vec<u8>> = Vec::with_capacity(n);
    for (p, (x, r)) in inputs.iter().zip(&input_masks).enumerate() {
        let eps: Vec<u32> = x.iter().zip(r).map(|(&a, &b)| (a + Q - b % Q) % Q).collect();
        echo_parts.push(field_to_bytes(&eps));
        let xi = auth_masks[p].add_public(&eps, &key);
        tr.push(1, p, MsgKind::InputMask, field_bytes(m), Payload::Field(eps));
        w_auth = Some(match w_auth {
            None => xi,
            Some(acc) => acc.add(&xi),
        });
    }
    let w_auth = w_auth.expect("at least one party");
    let echo_refs: Vec<&[u8]> = echo_parts.iter().map(Vec::as_slice).collect();
    let echo: [u8; 32] = tagged_hash(tag::MPC_OPEN, &echo_refs);
    for p in 0..n {
        tr.push(2, p, MsgKind::Echo, 32, Payload::Digest(echo));
    }

    // rounds 3-4: masked reveal
    let mut masked = w_auth.add(&eda.arith);
    if let Some(MpcFault::AdditiveTamper { party, delta }) = cfg.fault {
        masked.tamper_share(party, 0, delta);
    }
    let opened = masked_open(&masked, &sid, cfg.fault, &mut tr)?;

    // batched MAC check on the opening, committed now and opened with the result
    let mut coeff_rng = ChaCha20Rng::from_seed(tagged_hash(tag::MPC_OPEN, &[&sid, b"mac-check", &field_to_bytes(&opened)]));
    let rho: Vec<u32> = (0..m).map(|_| coeff_rng.gen_range(0..Q)).collect();
    let sigma: Vec<u32> = masked
        .mac_check_shares(&opened, &key)
        .iter()
        .map(|s| s.iter().zip(&rho).fold(0u32, |acc, (&x, &c)| (acc + mul_mod(x, c)) % Q))
        .collect();
    let sigma_coms: Vec<[u8; 32]> = sigma.iter().enumerate().map(|(p, &s)| open_commitment(&sid, p, b"sigma", &[s])).collect();
    for (p, c) in sigma_coms.iter().enumerate() {
        tr.push(5, p, MsgKind::MacCommit, 32, Payload::Digest(*c));
    }

    let (result, depth) = {
        let mut eng = BinaryEngine::new(n, &mut pool, &mut tr);
        eng.set_round(5);
        let w_bits = circuits::a2b_subtract(&mut eng, &opened, &eda.bits)?;
        eng.set_round(6);
        let reduced = circuits::reduce_centered_mod_alpha(&mut eng, &w_bits)?;
        eng.set_round(7);
        let pass = circuits::window_check(&mut eng, &reduced, cfg.bound)?;
        eng.set_round(8);
        let result = circuits::and_tree(&mut eng, &pass)?;
        (result, eng.depth())
    };

    // round 8: result shares and MAC-check openings
    for p in 0..n {
        let bit = binary::lane(result.party_share(p), 0);
        tr.push(8, p, MsgKind::ResultShare, 1, Payload::Bit(bit));
        tr.push(8, p, MsgKind::MacOpen, field_bytes(1), Payload::Field(vec![sigma[p]]));
    }
    if sigma.iter().enumerate().any(|(p, &s)| open_commitment(&sid, p, b"sigma", &[s]) != sigma_coms[p]) {
        return Err(Error::MpcAbort("MAC-check opening does not match its commitment".into()));
    }
    if sigma.iter().fold(0u32, |a, &s| (a + s) % Q) != 0 {
        return Err(Error::MpcAbort("MAC check failed on the masked opening".into()));
    }
    let pass = result.reveal_lanes()[0];
    Ok(MpcOutput {
        pass,
        rounds: tr.rounds(),
        and_depth: depth,
        and_gates: pool.used(),
        bytes_per_party: tr.bytes_per_party(n),
        edabit_resamples: eda.resamples,
        transcript: tr,
    })
}

/// Splits a public vector into additive shares; used to feed tests and demos.
pub fn share_input<R: RngCore + CryptoRng>(w_prime: &[u32], parties: usize, rng: &mut R) -> Vec<Vec<u32>> {
    arith::split(w_prime, parties, rng)
}

#[doc(hidden)]
pub fn shared_bits_for_tests(parties: usize, bits: &[bool], rng: &mut impl RngCore) -> SharedBits {
    SharedBits::deal(parties, bits.len(), &binary::pack_lanes(bits.iter().copied(), bits.len()), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{K, N};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plaintext_predicate_boundaries() {
        let b = R0_BOUND;
        assert!(plaintext_pass(0, b));
        assert!(plaintext_pass(b - 1, b));
        assert!(!plaintext_pass(b, b));
        assert!(!plaintext_pass(GAMMA2, b));
        // q - 1 is centered -1
        assert!(plaintext_pass(Q - 1, b));
        assert!(plaintext_pass(Q - b + 1, b));
        assert!(!plaintext_pass(Q - b, b));
    }

    #[test]
    fn small_instances_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bound = R0_BOUND;
        let specials = [0, bound - 1, bound, GAMMA2, Q - 1, ALPHA - bound, ALPHA - bound + 1, (Q - 1) / 2 + 1];
        for trial in 0..40 {
            let m = 37;
            let mut w: Vec<u32> = (0..m).map(|_| rng.gen_range(0..Q)).collect();
            if trial % 2 == 0 {
                // mostly-passing vectors
                for x in w.iter_mut() {
                    *x = (*x % bound + ALPHA * rng.gen_range(0..16)) % Q;
                }
            }
            w[trial % m] = specials[trial % specials.len()];
            let parties = 2 + trial % 3;
            let shares = share_input(&w, parties, &mut rng);
            let out = mpc_r0_check(&shares, &MpcConfig::default(), &mut rng).unwrap();
            assert_eq!(out.pass, plaintext_r0_check(&w, bound), "trial {trial}");
            assert_eq!(out.rounds, ONLINE_ROUNDS);
        }
    }

    #[test]
    fn full_size_round_and_depth_accounting() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w: Vec<u32> = vec![0; K * N];
        let shares = share_input(&w, 3, &mut rng);
        let out = mpc_r0_check(&shares, &MpcConfig::default(), &mut rng).unwrap();
        assert!(out.pass);
        assert_eq!(out.rounds, 8);
        assert!(out.bytes_per_party.iter().all(|&b| b == out.bytes_per_party[0]));
        let secrets: Vec<&[u32]> = shares.iter().map(Vec::as_slice).chain([w.as_slice()]).collect();
        out.transcript.audit(&secrets).unwrap();
    }

    #[test]
    fn faults_abort() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let w: Vec<u32> = (0..20).map(|_| rng.gen_range(0..Q)).collect();
        let shares = share_input(&w, 3, &mut rng);
        for fault in [MpcFault::Equivocate { party: 1 }, MpcFault::AdditiveTamper { party: 2, delta: 1 }] {
            let cfg = MpcConfig { fault: Some(fault), ..MpcConfig::default() };
            assert!(matches!(mpc_r0_check(&shares, &cfg, &mut rng), Err(Error::MpcAbort(_))));
        }
        let cfg = MpcConfig { triple_capacity: Some(100), ..MpcConfig::default() };
        assert!(matches!(mpc_r0_check(&shares, &cfg, &mut rng), Err(Error::TripleExhausted)));
    }
}
