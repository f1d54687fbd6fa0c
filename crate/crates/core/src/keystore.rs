//! On-disk key material.
//!
//! Every file is a container: `"TMLD" || version || kind` followed by
//! `(tag u8, len u32 BE, bytes)` fields. Polynomial vectors use 3 bytes per
//! coefficient. A keystore directory holds the public key, the combiner's
//! registry, one share file and one seed book per party, and an epoch marker.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::masking::SeedBook;
use crate::mldsa::encoding::{decode_public_key, encode_public_key};
use crate::mldsa::PublicKey;
use crate::params::{K, L};
use crate::ring::PolyVec;
use crate::threshold::{PartyShare, Registry};
use crate::PartyId;

pub const MAGIC: &[u8; 4] = b"TMLD";
pub const VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Kind {
    PublicKey = 1,
    Share = 2,
    SeedBook = 3,
    Registry = 4,
}

mod field {
    pub const BODY: u8 = 1;
    pub const INDEX: u8 = 2;
    pub const THRESHOLD: u8 = 3;
    pub const PARTIES: u8 = 4;
    pub const EPOCH: u8 = 5;
    pub const S1: u8 = 6;
    pub const S2: u8 = 7;
    pub const SEED: u8 = 8;
    pub const DIGEST: u8 = 9;
}

/// A parsed container.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Container {
    pub kind: Kind,
    pub fields: Vec<(u8, Vec<u8>)>,
}

impl Container {
    pub fn new(kind: Kind) -> Self {
        Self { kind, fields: Vec::new() }
    }

    pub fn push(&mut self, tag: u8, bytes: impl Into<Vec<u8>>) -> &mut Self {
        self.fields.push((tag, bytes.into()));
        self
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.kind as u8);
        for (tag, bytes) in &self.fields {
            out.push(*tag);
            out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
            out.extend_from_slice(bytes);
        }
        out
    }

    pub fn decode(bytes: &[u8], expect: Kind) -> Result<Self> {
        let rest = bytes.strip_prefix(MAGIC).ok_or(Error::Malformed("bad magic"))?;
        let [version, kind, tail @ ..] = rest else {
            return Err(Error::Malformed("truncated header"));
        };
        let mut rest: &[u8] = tail;
        if *version != VERSION {
            return Err(Error::Malformed("unsupported version"));
        }
        if *kind != expect as u8 {
            return Err(Error::Malformed("unexpected file kind"));
        }
        let mut fields = Vec::new();
        while let [tag, tail @ ..] = rest {
            if tail.len() < 4 {
                return Err(Error::Malformed("truncated field length"));
            }
            let len = u32::from_be_bytes(tail[..4].try_into().expect("4 bytes")) as usize;
            let body = tail[4..].get(..len).ok_or(Error::Malformed("truncated field"))?;
            fields.push((*tag, body.to_vec()));
            rest = &tail[4 + len..];
        }
        Ok(Self { kind: expect, fields })
    }

    pub fn get(&self, tag: u8) -> Result<&[u8]> {
        self.fields.iter().find(|(t, _)| *t == tag).map(|(_, b)| b.as_slice()).ok_or(Error::Malformed("missing field"))
    }

    fn get_all(&self, tag: u8) -> impl Iterator<Item = &[u8]> {
        self.fields.iter().filter(move |(t, _)| *t == tag).map(|(_, b)| b.as_slice())
    }

    fn get_u64(&self, tag: u8) -> Result<u64> {
        let b: [u8; 8] = self.get(tag)?.try_into().map_err(|_| Error::Malformed("integer field"))?;
        Ok(u64::from_be_bytes(b))
    }

    fn get_index(&self, tag: u8) -> Result<PartyId> {
        let b: [u8; 2] = self.get(tag)?.try_into().map_err(|_| Error::Malformed("index field"))?;
        Ok(PartyId::from_be_bytes(b))
    }
}

pub fn encode_pk(pk: &PublicKey) -> Vec<u8> {
    Container::new(Kind::PublicKey).push(field::BODY, encode_public_key(pk)).encode()
}

pub fn decode_pk(bytes: &[u8]) -> Result<PublicKey> {
    decode_public_key(Container::decode(bytes, Kind::PublicKey)?.get(field::BODY)?)
}

/// The share file: everything in [`PartyShare`] except the seed book.
pub fn encode_share(s: &PartyShare) -> Vec<u8> {
    Container::new(Kind::Share)
        .push(field::INDEX, s.index.to_be_bytes())
        .push(field::THRESHOLD, (s.threshold as u64).to_be_bytes())
        .push(field::PARTIES, (s.parties as u64).to_be_bytes())
        .push(field::EPOCH, s.epoch.to_be_bytes())
        .push(field::S1, s.s1.to_bytes())
        .push(field::S2, s.s2.to_bytes())
        .encode()
}

pub fn encode_seed_book(b: &SeedBook) -> Vec<u8> {
    let mut c = Container::new(Kind::SeedBook);
    c.push(field::INDEX, b.owner().to_be_bytes());
    for ((x, y), seed) in b.entries() {
        let other = if x == b.owner() { y } else { x };
        let mut body = other.to_be_bytes().to_vec();
        body.extend_from_slice(seed);
        c.push(field::SEED, body);
    }
    c.encode()
}

pub fn decode_seed_book(bytes: &[u8]) -> Result<SeedBook> {
    let c = Container::decode(bytes, Kind::SeedBook)?;
    let mut book = SeedBook::new(c.get_index(field::INDEX)?);
    for body in c.get_all(field::SEED) {
        if body.len() != 34 {
            return Err(Error::Malformed("seed entry"));
        }
        let other = PartyId::from_be_bytes([body[0], body[1]]);
        if other == book.owner() {
            return Err(Error::Malformed("seed with oneself"));
        }
        book.insert(other, body[2..].try_into().expect("32 bytes"));
    }
    Ok(book)
}

/// Rebuilds a share from its share file and seed book.
pub fn decode_share(share: &[u8], seeds: &[u8]) -> Result<PartyShare> {
    let c = Container::decode(share, Kind::Share)?;
    let seeds = decode_seed_book(seeds)?;
    let index = c.get_index(field::INDEX)?;
    if seeds.owner() != index {
        return Err(Error::Inconsistent("seed book belongs to another party"));
    }
    let vec = |tag, dim| PolyVec::from_bytes(dim, c.get(tag)?).ok_or(Error::Malformed("polynomial vector"));
    Ok(PartyShare {
        index,
        threshold: c.get_u64(field::THRESHOLD)? as usize,
        parties: c.get_u64(field::PARTIES)? as usize,
        epoch: c.get_u64(field::EPOCH)?,
        s1: vec(field::S1, L)?,
        s2: vec(field::S2, K)?,
        seeds,
    })
}

pub fn encode_registry(r: &Registry) -> Vec<u8> {
    let mut c = Container::new(Kind::Registry);
    c.push(field::THRESHOLD, (r.threshold as u64).to_be_bytes())
        .push(field::PARTIES, (r.parties as u64).to_be_bytes())
        .push(field::EPOCH, r.epoch.to_be_bytes());
    for (i, d) in &r.digests {
        let mut body = i.to_be_bytes().to_vec();
        body.extend_from_slice(d);
        c.push(field::DIGEST, body);
    }
    c.encode()
}

pub fn decode_registry(bytes: &[u8]) -> Result<Registry> {
    let c = Container::decode(bytes, Kind::Registry)?;
    let mut digests = std::collections::BTreeMap::new();
    for body in c.get_all(field::DIGEST) {
        if body.len() != 34 {
            return Err(Error::Malformed("digest entry"));
        }
        let i = PartyId::from_be_bytes([body[0], body[1]]);
        if digests.insert(i, body[2..].try_into().expect("32 bytes")).is_some() {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(Registry {
        threshold: c.get_u64(field::THRESHOLD)? as usize,
        parties: c.get_u64(field::PARTIES)? as usize,
        epoch: c.get_u64(field::EPOCH)?,
        digests,
    })
}

/// A keystore directory.
#[derive(Clone, Debug)]
pub struct Keystore {
    dir: PathBuf,
}

impl Keystore {
    pub const PK_FILE: &'static str = "pk.tmld";
    pub const REGISTRY_FILE: &'static str = "registry.tmld";
    pub const EPOCH_FILE: &'static str = "EPOCH";

    pub fn open(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn share_path(&self, i: PartyId) -> PathBuf {
        self.dir.join(format!("share-{i:03}.tmld"))
    }

    pub fn seeds_path(&self, i: PartyId) -> PathBuf {
        self.dir.join(format!("seeds-{i:03}.tmld"))
    }

    /// Creates a keystore in an empty or missing directory.
    pub fn create(dir: impl Into<PathBuf>, pk: &PublicKey, registry: &Registry, shares: &[PartyShare]) -> Result<Self> {
        let ks = Self::open(dir);
        if ks.dir.exists() && fs::read_dir(&ks.dir)?.next().is_some() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::AlreadyExists,
                format!("{} is not empty", ks.dir.display()),
            )));
        }
        fs::create_dir_all(&ks.dir)?;
        write(&ks.dir.join(Self::PK_FILE), &encode_pk(pk))?;
        ks.store_shares(registry, shares)?;
        Ok(ks)
    }

    /// Replaces all shares, the registry and the epoch marker.
    pub fn store_shares(&self, registry: &Registry, shares: &[PartyShare]) -> Result<()> {
        for s in shares {
            write(&self.share_path(s.index), &encode_share(s))?;
            write(&self.seeds_path(s.index), &encode_seed_book(&s.seeds))?;
        }
        write(&self.dir.join(Self::REGISTRY_FILE), &encode_registry(registry))?;
        write(&self.dir.join(Self::EPOCH_FILE), format!("{}\n", registry.epoch).as_bytes())
    }

    pub fn public_key(&self) -> Result<PublicKey> {
        decode_pk(&fs::read(self.dir.join(Self::PK_FILE))?)
    }

    pub fn registry(&self) -> Result<Registry> {
        decode_registry(&fs::read(self.dir.join(Self::REGISTRY_FILE))?)
    }

    pub fn epoch(&self) -> Result<u64> {
        fs::read_to_string(self.dir.join(Self::EPOCH_FILE))?.trim().parse().map_err(|_| Error::Malformed("epoch marker"))
    }

    pub fn share(&self, i: PartyId) -> Result<PartyShare> {
        decode_share(&fs::read(self.share_path(i))?, &fs::read(self.seeds_path(i))?)
    }

    /// Loads the given parties' shares and checks them against the registry.
    pub fn shares(&self, parties: &[PartyId]) -> Result<Vec<PartyShare>> {
        let registry = self.registry()?;
        parties
            .iter()
            .map(|&i| {
                let s = self.share(i)?;
                if s.index != i || registry.digests.get(&i) != Some(&s.digest()) {
                    return Err(Error::Inconsistent("share file does not match the registry"));
                }
                Ok(s)
            })
            .collect()
    }

    /// Every party's share.
    pub fn all_shares(&self) -> Result<Vec<PartyShare>> {
        let parties: Vec<PartyId> = (1..=self.registry()?.parties as PartyId).collect();
        self.shares(&parties)
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
