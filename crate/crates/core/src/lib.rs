//! Masked threshold ML-DSA-65.
//!
//! `N` parties hold Shamir shares of an ML-DSA-65 secret key. Any signer set
//! of at least `T + 1` parties runs a three-round protocol whose messages are
//! blinded by pairwise-canceling PRF masks; a trusted combiner aggregates
//! them into an ordinary ML-DSA signature that the stock verifier accepts.
//!
//! Module map:
//!
//! * [`ring`]: `R_q` arithmetic, NTT, Decompose and hints.
//! * [`mldsa`]: single-signer keygen, sign, verify and encodings.
//! * [`shamir`]: coefficient-wise Shamir sharing of polynomial vectors.
//! * [`masking`]: pairwise seed books and canceling masks.
//! * [`threshold`]: the signing protocol, combiner and blame path.
//! * [`dkg`]: dealer-free key generation and proactive refresh.
//! * [`mpc`]: the r0-check as a secure computation (toy-scale simulation).
//! * [`stats`]: rejection model, Renyi bounds and the benchmark harness.
//! * [`keystore`]: versioned binary containers for keys, shares and seeds.

pub mod dkg;
pub mod error;
pub mod hash;
pub mod keystore;
pub mod masking;
pub mod mldsa;
pub mod mpc;
pub mod params;
pub mod ring;
pub mod shamir;
pub mod stats;
pub mod threshold;

/// 1-based party index; 0 is the evaluation point of the secret.
pub type PartyId = u16;

pub use error::{Error, Result};
pub use mldsa::{PublicKey, SecretKey, Signature};
pub use ring::{Poly, PolyVec};
