//! SPDZ-style authenticated additive sharing over `Z_q`.

use rand::{CryptoRng, Rng, RngCore};

use crate::error::{Error, Result};
use crate::params::Q;
use crate::ring::mul_mod;

#[inline]
fn add_q(a: u32, b: u32) -> u32 {
    let s = a + b;
    if s >= Q {
        s - Q
    } else {
        s
    }
}

#[inline]
fn sub_q(a: u32, b: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + Q - b
    }
}

/// Additive sharing of a vector in `Z_q^n`: `shares[p][j]` is party `p`'s share of entry `j`.
pub fn split<R: RngCore + CryptoRng>(values: &[u32], parties: usize, rng: &mut R) -> Vec<Vec<u32>> {
    assert!(parties > 0);
    let mut shares: Vec<Vec<u32>> = (1..parties).map(|_| (0..values.len()).map(|_| rng.gen_range(0..Q)).collect()).collect();
    let last = values
        .iter()
        .enumerate()
        .map(|(j, &v)| shares.iter().fold(v, |acc, s| sub_q(acc, s[j])))
        .collect();
    shares.push(last);
    shares
}

pub fn combine(shares: &[Vec<u32>]) -> Vec<u32> {
    let m = shares.first().map_or(0, Vec::len);
    (0..m).map(|j| shares.iter().fold(0, |acc, s| add_q(acc, s[j]))).collect()
}

/// Additive shares of the global MAC key `alpha`.
#[derive(Clone, Debug)]
pub struct MacKey {
    shares: Vec<u32>,
}

impl MacKey {
    pub fn random<R: RngCore + CryptoRng>(parties: usize, rng: &mut R) -> Self {
        Self { shares: (0..parties).map(|_| rng.gen_range(0..Q)).collect() }
    }

    pub fn parties(&self) -> usize {
        self.shares.len()
    }

    pub fn share(&self, party: usize) -> u32 {
        self.shares[party]
    }

    fn alpha(&self) -> u32 {
        self.shares.iter().fold(0, |a, &s| add_q(a, s))
    }
}

/// An authenticated shared vector: `sum shares = x` and `sum macs = alpha * x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthVec {
    shares: Vec<Vec<u32>>,
    macs: Vec<Vec<u32>>,
}

impl AuthVec {
    /// Dealer-side authenticated sharing of known values.
    pub fn deal<R: RngCore + CryptoRng>(values: &[u32], key: &MacKey, rng: &mut R) -> Self {
        let alpha = key.alpha();
        let tagged: Vec<u32> = values.iter().map(|&v| mul_mod(alpha, v)).collect();
        Self { shares: split(values, key.parties(), rng), macs: split(&tagged, key.parties(), rng) }
    }

    pub fn len(&self) -> usize {
        self.shares.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parties(&self) -> usize {
        self.shares.len()
    }

    pub fn party_share(&self, party: usize) -> &[u32] {
        &self.shares[party]
    }

    pub fn party_mac(&self, party: usize) -> &[u32] {
        &self.macs[party]
    }

    pub fn add(&self, other: &AuthVec) -> AuthVec {
        let zip = |a: &[Vec<u32>], b: &[Vec<u32>]| -> Vec<Vec<u32>> {
            a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| add_q(u, v)).collect()).collect()
        };
        AuthVec { shares: zip(&self.shares, &other.shares), macs: zip(&self.macs, &other.macs) }
    }

    /// Adds a public vector: party 0 adjusts its share, everyone adjusts its MAC.
    pub fn add_public(&self, c: &[u32], key: &MacKey) -> AuthVec {
        let mut out = self.clone();
        for (j, &cj) in c.iter().enumerate() {
            out.shares[0][j] = add_q(out.shares[0][j], cj);
            for p in 0..out.parties() {
                out.macs[p][j] = add_q(out.macs[p][j], mul_mod(key.share(p), cj));
            }
        }
        out
    }

    /// Adds `delta` to one party's share without touching MACs, as a cheating party would.
    pub fn tamper_share(&mut self, party: usize, j: usize, delta: u32) {
        self.shares[party][j] = add_q(self.shares[party][j], delta % Q);
    }

    /// Per-party MAC check values `sigma_p = mac_p - alpha_p * x` for an opened `x`.
    pub fn mac_check_shares(&self, opened: &[u32], key: &MacKey) -> Vec<Vec<u32>> {
        (0..self.parties())
            .map(|p| {
                opened.iter().enumerate().map(|(j, &x)| sub_q(self.macs[p][j], mul_mod(key.share(p), x))).collect()
            })
            .collect()
    }

    /// Opens the vector and runs the MAC check.
    pub fn open(&self, key: &MacKey) -> Result<Vec<u32>> {
        let opened = combine(&self.shares);
        let sigma = combine(&self.mac_check_shares(&opened, key));
        if sigma.iter().any(|&s| s != 0) {
            return Err(Error::MpcAbort("MAC check failed".into()));
        }
        Ok(opened)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_and_combine() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<u32> = (0..100).map(|_| rng.gen_range(0..Q)).collect();
        for n in [1, 2, 7] {
            assert_eq!(combine(&split(&v, n, &mut rng)), v);
        }
    }

    #[test]
    fn macs_are_consistent_and_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let key = MacKey::random(4, &mut rng);
        let a: Vec<u32> = (0..50).map(|_| rng.gen_range(0..Q)).collect();
        let b: Vec<u32> = (0..50).map(|_| rng.gen_range(0..Q)).collect();
        let x = AuthVec::deal(&a, &key, &mut rng);
        let y = AuthVec::deal(&b, &key, &mut rng);
        let alpha = key.alpha();
        let macs = combine(&x.macs);
        assert!(macs.iter().zip(&a).all(|(&m, &v)| m == mul_mod(alpha, v)));
        let sum = x.add(&y).add_public(&b, &key);
        let expect: Vec<u32> = a.iter().zip(&b).map(|(&u, &v)| add_q(u, add_q(v, v))).collect();
        assert_eq!(sum.open(&key).unwrap(), expect);
    }

    #[test]
    fn tampered_share_fails_mac_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let key = MacKey::random(3, &mut rng);
        let mut x = AuthVec::deal(&[5, 6, 7], &key, &mut rng);
        x.tamper_share(1, 2, 1);
        assert!(matches!(x.open(&key), Err(Error::MpcAbort(_))));
    }
}
