//! Domain-separated SHAKE-256 hashing.
//!
//! Every hash or PRF call is framed as
//! `tag || 0x00 || (len_be32 || payload)*` so that inputs parse uniquely.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::{Shake128, Shake256};

/// ASCII domain tags.
pub mod tag {
    pub const COMMIT: &str = "com";
    pub const NONCE0: &str = "nonce0";
    pub const NONCE: &str = "nonce";
    pub const RESP: &str = "resp";
    pub const COMM: &str = "comm";
    pub const S2: &str = "s2";
    pub const CHAL: &str = "chal";
    pub const SHARE: &str = "share";
    pub const MPC_OPEN: &str = "mpc-open";
}

pub struct TaggedXof {
    reader: <Shake256 as ExtendableOutput>::Reader,
}

impl TaggedXof {
    pub fn new(tag: &str, parts: &[&[u8]]) -> Self {
        let mut h = Shake256::default();
        h.update(tag.as_bytes());
        h.update(&[0u8]);
        for p in parts {
            h.update(&(p.len() as u32).to_be_bytes());
            h.update(p);
        }
        Self { reader: h.finalize_xof() }
    }

    pub fn read(&mut self, out: &mut [u8]) {
        self.reader.read(out);
    }
}

impl XofReader for TaggedXof {
    fn read(&mut self, buffer: &mut [u8]) {
        self.reader.read(buffer);
    }
}

pub fn tagged_hash<const LEN: usize>(tag: &str, parts: &[&[u8]]) -> [u8; LEN] {
    let mut out = [0u8; LEN];
    TaggedXof::new(tag, parts).read(&mut out);
    out
}

/// Plain SHAKE-256 over the concatenation of `parts`, as FIPS 204 uses it.
pub fn shake256(parts: &[&[u8]], out: &mut [u8]) {
    let mut h = Shake256::default();
    for p in parts {
        h.update(p);
    }
    h.finalize_xof().read(out);
}

pub(crate) fn shake256_reader(parts: &[&[u8]]) -> impl XofReader {
    let mut h = Shake256::default();
    for p in parts {
        h.update(p);
    }
    h.finalize_xof()
}

pub(crate) fn shake128_reader(parts: &[&[u8]]) -> impl XofReader {
    let mut h = Shake128::default();
    for p in parts {
        h.update(p);
    }
    h.finalize_xof()
}
