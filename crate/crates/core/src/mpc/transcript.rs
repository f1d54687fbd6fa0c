//! Message log of an r0-check run, with byte accounting and a leakage audit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Everything a party may put on the wire during the online phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MsgKind {
    /// `x_i - r_i` for the authenticated input of party `i`.
    InputMask,
    /// Digest of all input broadcasts seen, for broadcast consistency.
    Echo,
    OpenCommit,
    /// A share of `w' + r` for the masked reveal.
    OpenShare,
    /// Shares of `(d, e)` for one layer of Beaver AND gates.
    BeaverOpen,
    MacCommit,
    MacOpen,
    ResultShare,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    Field(Vec<u32>),
    Bits(Vec<u64>),
    Digest([u8; 32]),
    Bit(bool),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpcMessage {
    pub round: u8,
    pub from: usize,
    pub kind: MsgKind,
    pub bytes: usize,
    pub payload: Payload,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpcTranscript {
    pub messages: Vec<MpcMessage>,
}

pub(crate) fn field_bytes(len: usize) -> usize {
    len * 3
}

pub(crate) fn lane_bytes(lanes: usize) -> usize {
    lanes.div_ceil(8)
}

impl MpcTranscript {
    pub fn push(&mut self, round: u8, from: usize, kind: MsgKind, bytes: usize, payload: Payload) {
        self.messages.push(MpcMessage { round, from, kind, bytes, payload });
    }

    /// Number of distinct communication rounds.
    pub fn rounds(&self) -> usize {
        self.messages.iter().map(|m| m.round).collect::<BTreeSet<_>>().len()
    }

    pub fn bytes_per_party(&self, parties: usize) -> Vec<usize> {
        let mut out = vec![0; parties];
        for m in &self.messages {
            out[m.from] += m.bytes;
        }
        out
    }

    /// Bytes per round, summed over parties.
    pub fn bytes_per_round(&self) -> BTreeMap<u8, usize> {
        let mut out = BTreeMap::new();
        for m in &self.messages {
            *out.entry(m.round).or_default() += m.bytes;
        }
        out
    }

    /// Checks that only permitted message kinds appear and that none of the
    /// `secrets` vectors (e.g. `w'` or an input share) is sent in the clear.
    pub fn audit(&self, secrets: &[&[u32]]) -> std::result::Result<(), String> {
        for (idx, m) in self.messages.iter().enumerate() {
            let allowed = match m.kind {
                MsgKind::InputMask | MsgKind::OpenShare | MsgKind::MacOpen => matches!(m.payload, Payload::Field(_)),
                MsgKind::Echo | MsgKind::OpenCommit | MsgKind::MacCommit => matches!(m.payload, Payload::Digest(_)),
                MsgKind::BeaverOpen => matches!(m.payload, Payload::Bits(_)),
                MsgKind::ResultShare => matches!(m.payload, Payload::Bit(_)),
            };
            if !allowed {
                return Err(format!("message {idx}: payload does not match kind {:?}", m.kind));
            }
            if let Payload::Field(v) = &m.payload {
                if secrets.iter().any(|s| !s.is_empty() && s == &v.as_slice()) {
                    return Err(format!("message {idx} ({:?}) carries a secret vector", m.kind));
                }
            }
        }
        Ok(())
    }
}
