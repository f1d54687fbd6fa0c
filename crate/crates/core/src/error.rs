use thiserror::Error;

use crate::PartyId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("retry limit of {0} attempts exceeded")]
    RetryLimit(usize),
    #[error("malformed encoding: {0}")]
    Malformed(&'static str),
    #[error("invalid threshold parameters: T={t}, N={n}")]
    InvalidThreshold { t: usize, n: usize },
    #[error("party index {0} is not a valid evaluation point")]
    InvalidIndex(PartyId),
    #[error("duplicate party index {0}")]
    DuplicateIndex(PartyId),
    #[error("need at least {needed} shares, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error(
        "signer set of size {size} is too small for threshold T={t}: at least T+1 signers are \
         required so that two honest parties share a mask seed unknown to the adversary"
    )]
    SignerSetTooSmall { size: usize, t: usize },
    #[error("missing pairwise seed for parties ({0}, {1})")]
    MissingSeed(PartyId, PartyId),
    #[error("missing message from party {0}")]
    MissingMessage(PartyId),
    #[error("party {0} is not in the signer set")]
    NotInSignerSet(PartyId),
    #[error("protocol state violation: {0}")]
    State(&'static str),
    #[error("MPC abort: {0}")]
    MpcAbort(String),
    #[error("Beaver triple pool exhausted")]
    TripleExhausted,
    #[error("blame protocol identified parties {0:?}")]
    Blame(Vec<PartyId>),
    #[error("inconsistent key material: {0}")]
    Inconsistent(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
