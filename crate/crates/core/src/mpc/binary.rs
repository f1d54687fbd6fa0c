//! XOR-shared bits, bit-sliced across lanes, and Beaver AND gates.
//!
//! A [`SharedBits`] holds one bit per lane (one lane per coefficient), packed
//! 64 lanes to a word. XOR and public operations are local; AND consumes one
//! preprocessed triple per lane and opens `(d, e)` in one round.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::transcript::{lane_bytes, MpcTranscript, MsgKind, Payload};
use crate::error::{Error, Result};

fn lane_mask(lanes: usize) -> Vec<u64> {
    let words = lanes.div_ceil(64);
    let mut m = vec![u64::MAX; words];
    if lanes % 64 != 0 {
        m[words - 1] = (1u64 << (lanes % 64)) - 1;
    }
    m
}

/// Packs one public bit per lane.
pub fn pack_lanes(bits: impl IntoIterator<Item = bool>, lanes: usize) -> Vec<u64> {
    let mut out = vec![0u64; lanes.div_ceil(64)];
    for (j, b) in bits.into_iter().enumerate().take(lanes) {
        out[j / 64] |= (b as u64) << (j % 64);
    }
    out
}

pub fn lane(words: &[u64], j: usize) -> bool {
    (words[j / 64] >> (j % 64)) & 1 == 1
}

/// Bit-slices integers: result `[k][word]` holds bit `k` of every lane.
pub fn bitslice(values: &[u32], bits: usize) -> Vec<Vec<u64>> {
    (0..bits).map(|k| pack_lanes(values.iter().map(|&v| (v >> k) & 1 == 1), values.len())).collect()
}

pub fn unbitslice(planes: &[Vec<u64>], lanes: usize) -> Vec<u32> {
    (0..lanes).map(|j| planes.iter().enumerate().fold(0u32, |acc, (k, p)| acc | ((lane(p, j) as u32) << k))).collect()
}

/// XOR sharing of a lane vector of bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedBits {
    lanes: usize,
    shares: Vec<Vec<u64>>,
}

impl SharedBits {
    /// Sharing of a public value: party 0 holds it, the rest hold zero.
    pub fn public(parties: usize, lanes: usize, words: &[u64]) -> Self {
        let mask = lane_mask(lanes);
        let mut shares = vec![vec![0u64; mask.len()]; parties];
        for (w, (s, m)) in shares[0].iter_mut().zip(&mask).enumerate() {
            *s = words[w] & m;
        }
        Self { lanes, shares }
    }

    pub fn constant(parties: usize, lanes: usize, bit: bool) -> Self {
        let words = if bit { lane_mask(lanes) } else { vec![0; lanes.div_ceil(64)] };
        Self::public(parties, lanes, &words)
    }

    /// Random XOR sharing of `words`.
    pub fn deal(parties: usize, lanes: usize, words: &[u64], rng: &mut impl RngCore) -> Self {
        let mask = lane_mask(lanes);
        let mut shares: Vec<Vec<u64>> =
            (1..parties).map(|_| mask.iter().map(|m| rng.next_u64() & m).collect()).collect();
        let last = (0..mask.len()).map(|w| shares.iter().fold(words[w] & mask[w], |acc, s| acc ^ s[w])).collect();
        shares.push(last);
        Self { lanes, shares }
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    pub fn parties(&self) -> usize {
        self.shares.len()
    }

    pub fn party_share(&self, p: usize) -> &[u64] {
        &self.shares[p]
    }

    pub fn xor(&self, other: &SharedBits) -> SharedBits {
        let shares = self
            .shares
            .iter()
            .zip(&other.shares)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x ^ y).collect())
            .collect();
        SharedBits { lanes: self.lanes, shares }
    }

    pub fn xor_public(&self, words: &[u64]) -> SharedBits {
        let mut out = self.clone();
        let mask = lane_mask(self.lanes);
        for (w, s) in out.shares[0].iter_mut().enumerate() {
            *s ^= words[w] & mask[w];
        }
        out
    }

    pub fn not(&self) -> SharedBits {
        self.xor_public(&lane_mask(self.lanes))
    }

    /// AND with a public lane vector; local.
    pub fn and_public(&self, words: &[u64]) -> SharedBits {
        let shares = self.shares.iter().map(|s| s.iter().zip(words).map(|(x, y)| x & y).collect()).collect();
        SharedBits { lanes: self.lanes, shares }
    }

    pub fn reveal(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.shares[0].len()];
        for s in &self.shares {
            for (o, x) in out.iter_mut().zip(s) {
                *o ^= x;
            }
        }
        out
    }

    pub fn reveal_lanes(&self) -> Vec<bool> {
        let words = self.reveal();
        (0..self.lanes).map(|j| lane(&words, j)).collect()
    }

    /// Lanes of `self` followed by lanes of `other`; local.
    pub fn concat(&self, other: &SharedBits) -> SharedBits {
        let lanes = self.lanes + other.lanes;
        let shares = self
            .shares
            .iter()
            .zip(&other.shares)
            .map(|(a, b)| {
                let bits = (0..self.lanes).map(|j| lane(a, j)).chain((0..other.lanes).map(|j| lane(b, j)));
                pack_lanes(bits, lanes)
            })
            .collect();
        SharedBits { lanes, shares }
    }

    /// Local lane permutation: lanes `range` of `self` become lanes `0..len`.
    pub fn select(&self, start: usize, len: usize) -> SharedBits {
        let shares = self
            .shares
            .iter()
            .map(|s| pack_lanes((start..start + len).map(|j| lane(s, j)), len))
            .collect();
        SharedBits { lanes: len, shares }
    }
}

/// Preprocessed AND triples `(a, b, a & b)` from a trusted dealer.
pub struct TriplePool {
    rng: ChaCha20Rng,
    capacity: Option<u64>,
    used: u64,
}

pub struct Triple {
    pub a: SharedBits,
    pub b: SharedBits,
    pub c: SharedBits,
}

impl TriplePool {
    /// `capacity` is the number of single-bit AND gates available; `None` is unbounded.
    pub fn new(seed: [u8; 32], capacity: Option<u64>) -> Self {
        Self { rng: ChaCha20Rng::from_seed(seed), capacity, used: 0 }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn take(&mut self, parties: usize, lanes: usize) -> Result<Triple> {
        if let Some(cap) = self.capacity {
            if self.used + lanes as u64 > cap {
                return Err(Error::TripleExhausted);
            }
        }
        self.used += lanes as u64;
        let words = lanes.div_ceil(64);
        let a: Vec<u64> = (0..words).map(|_| self.rng.next_u64()).collect();
        let b: Vec<u64> = (0..words).map(|_| self.rng.next_u64()).collect();
        let c: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x & y).collect();
        Ok(Triple {
            a: SharedBits::deal(parties, lanes, &a, &mut self.rng),
            b: SharedBits::deal(parties, lanes, &b, &mut self.rng),
            c: SharedBits::deal(parties, lanes, &c, &mut self.rng),
        })
    }
}

/// Evaluates AND layers, logging every `(d, e)` opening.
pub struct BinaryEngine<'a> {
    parties: usize,
    pool: &'a mut TriplePool,
    transcript: &'a mut MpcTranscript,
    round: u8,
    layers: usize,
}

impl<'a> BinaryEngine<'a> {
    pub fn new(parties: usize, pool: &'a mut TriplePool, transcript: &'a mut MpcTranscript) -> Self {
        Self { parties, pool, transcript, round: 0, layers: 0 }
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    /// Tags subsequent openings with a logical round number.
    pub fn set_round(&mut self, round: u8) {
        self.round = round;
    }

    /// Number of sequential AND layers evaluated so far.
    pub fn depth(&self) -> usize {
        self.layers
    }

    pub fn transcript(&mut self) -> &mut MpcTranscript {
        self.transcript
    }

    /// One layer of independent AND gates sharing a single opening round.
    pub fn and_layer(&mut self, pairs: &[(&SharedBits, &SharedBits)]) -> Result<Vec<SharedBits>> {
        let mut triples = Vec::with_capacity(pairs.len());
        for (x, _) in pairs {
            triples.push(self.pool.take(self.parties, x.lanes)?);
        }
        let mut opened = Vec::with_capacity(pairs.len());
        let mut sent: Vec<Vec<u64>> = vec![Vec::new(); self.parties];
        let mut bytes = 0;
        for ((x, y), t) in pairs.iter().zip(&triples) {
            let d = x.xor(&t.a);
            let e = y.xor(&t.b);
            for (p, buf) in sent.iter_mut().enumerate() {
                buf.extend_from_slice(d.party_share(p));
                buf.extend_from_slice(e.party_share(p));
            }
            bytes += 2 * lane_bytes(x.lanes);
            opened.push((d.reveal(), e.reveal()));
        }
        for (p, buf) in sent.into_iter().enumerate() {
            self.transcript.push(self.round, p, MsgKind::BeaverOpen, bytes, Payload::Bits(buf));
        }
        self.layers += 1;
        Ok(triples
            .iter()
            .zip(&opened)
            .map(|(t, (d, e))| {
                let de: Vec<u64> = d.iter().zip(e).map(|(u, v)| u & v).collect();
                t.c.xor(&t.b.and_public(d)).xor(&t.a.and_public(e)).xor_public(&de)
            })
            .collect())
    }

    pub fn and(&mut self, x: &SharedBits, y: &SharedBits) -> Result<SharedBits> {
        Ok(self.and_layer(&[(x, y)])?.pop().expect("one gate"))
    }
}
