//! Shamir sharing over `Z_q`, applied independently to every coefficient of
//! a polynomial vector.

use std::collections::{BTreeMap, BTreeSet};

use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{N, Q};
use crate::ring::ntt::pow_mod;
use crate::ring::{mul_mod, PolyVec};
use crate::PartyId;

/// One party's share of a shared polynomial vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareOf {
    pub party: PartyId,
    pub value: PolyVec,
}

pub fn inv_mod(a: u32) -> u32 {
    assert!(a % Q != 0, "zero has no inverse");
    pow_mod(a as u64, Q as u64 - 2) as u32
}

/// Samples a degree `T - 1` polynomial per coefficient with constant term the
/// secret coefficient and hands `f(i)` to party `i` for `i in 1..=N`.
pub fn share<R: RngCore + CryptoRng>(secret: &PolyVec, t: usize, n: usize, rng: &mut R) -> Result<Vec<ShareOf>> {
    if t == 0 || t > n || n >= Q as usize || n > PartyId::MAX as usize {
        return Err(Error::InvalidThreshold { t, n });
    }
    let dim = secret.dim();
    let mut values: Vec<Vec<u32>> = vec![Vec::with_capacity(dim * N); n];
    let mut poly = vec![0u32; t];
    for s in secret.coeffs() {
        poly[0] = s;
        for c in poly.iter_mut().skip(1) {
            *c = rng.gen_range(0..Q);
        }
        for (i, out) in values.iter_mut().enumerate() {
            out.push(horner(&poly, i as u32 + 1));
        }
    }
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(i, v)| ShareOf { party: i as PartyId + 1, value: PolyVec::from_coeff_iter(dim, v) })
        .collect())
}

fn horner(poly: &[u32], x: u32) -> u32 {
    poly.iter().rev().fold(0u32, |acc, &c| {
        let v = mul_mod(acc, x) + c;
        if v >= Q {
            v - Q
        } else {
            v
        }
    })
}

/// Lagrange coefficients at zero for a signer set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagrangeSet {
    signers: Vec<PartyId>,
    coeffs: BTreeMap<PartyId, u32>,
}

impl LagrangeSet {
    pub fn signers(&self) -> &[PartyId] {
        &self.signers
    }

    pub fn coeff(&self, i: PartyId) -> Option<u32> {
        self.coeffs.get(&i).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PartyId, u32)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }
}

/// Checks indices are distinct, non-zero and returns them sorted.
pub fn normalize_set(set: &[PartyId]) -> Result<Vec<PartyId>> {
    let mut seen = BTreeSet::new();
    for &i in set {
        if i == 0 {
            return Err(Error::InvalidIndex(i));
        }
        if !seen.insert(i) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(seen.into_iter().collect())
}

/// `lambda_i = prod_{j != i} j / (j - i) mod q`.
pub fn lagrange_coeffs(set: &[PartyId]) -> Result<LagrangeSet> {
    let signers = normalize_set(set)?;
    let mut coeffs = BTreeMap::new();
    for &i in &signers {
        let (mut num, mut den) = (1u32, 1u32);
        for &j in &signers {
            if j == i {
                continue;
            }
            num = mul_mod(num, j as u32);
            den = mul_mod(den, (j as i64 - i as i64).rem_euclid(Q as i64) as u32);
        }
        coeffs.insert(i, mul_mod(num, inv_mod(den)));
    }
    Ok(LagrangeSet { signers, coeffs })
}

/// Interpolates the secret from at least `t` shares.
pub fn reconstruct(shares: &[ShareOf], t: usize) -> Result<PolyVec> {
    if shares.len() < t || shares.is_empty() {
        return Err(Error::InsufficientShares { needed: t.max(1), got: shares.len() });
    }
    let ids: Vec<PartyId> = shares.iter().map(|s| s.party).collect();
    let lagrange = lagrange_coeffs(&ids)?;
    let dim = shares[0].value.dim();
    let mut acc = PolyVec::zero(dim);
    for s in shares {
        let lambda = lagrange.coeff(s.party).expect("party in set");
        acc += &s.value.scale(lambda);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mldsa::sampling::sample_short;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> PolyVec {
        PolyVec::from_coeff_iter(dim, (0..dim * N).map(|_| rng.gen_range(0..Q)))
    }

    #[test]
    fn threshold_one_copies_secret() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let s = random_vec(&mut rng, 5);
        for sh in share(&s, 1, 4, &mut rng).unwrap() {
            assert_eq!(sh.value, s);
        }
    }

    #[test]
    fn full_threshold_and_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let s = random_vec(&mut rng, 2);
        let shares = share(&s, 3, 3, &mut rng).unwrap();
        assert_eq!(reconstruct(&shares, 3).unwrap(), s);

        let shares = share(&s, 3, 5, &mut rng).unwrap();
        let mut count = 0;
        for a in 0..5 {
            for b in a + 1..5 {
                for c in b + 1..5 {
                    let subset = [shares[a].clone(), shares[b].clone(), shares[c].clone()];
                    assert_eq!(reconstruct(&subset, 3).unwrap(), s);
                    count += 1;
                }
            }
        }
        assert_eq!(count, 10);
    }

    #[test]
    fn errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let s = random_vec(&mut rng, 1);
        assert!(matches!(share(&s, 4, 3, &mut rng), Err(Error::InvalidThreshold { .. })));
        assert!(matches!(lagrange_coeffs(&[1, 2, 2]), Err(Error::DuplicateIndex(2))));
        assert!(matches!(lagrange_coeffs(&[0, 1]), Err(Error::InvalidIndex(0))));
        let shares = share(&s, 3, 5, &mut rng).unwrap();
        assert!(matches!(reconstruct(&shares[..2], 3), Err(Error::InsufficientShares { needed: 3, got: 2 })));
    }

    #[test]
    fn small_lagrange_sets() {
        let l = lagrange_coeffs(&[1, 2, 3]).unwrap();
        assert_eq!(l.coeff(1), Some(3));
        assert_eq!(l.coeff(2), Some(Q - 3));
        assert_eq!(l.coeff(3), Some(1));
        assert_eq!(lagrange_coeffs(&[1]).unwrap().coeff(1), Some(1));
        // order of the input does not matter
        assert_eq!(lagrange_coeffs(&[3, 1, 2]).unwrap(), l);
    }

    #[test]
    fn reconstruction_over_many_secrets() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let s = sample_short(&mut rng, 5);
            let mut shares = share(&s, 3, 5, &mut rng).unwrap();
            shares.shuffle(&mut rng);
            assert_eq!(reconstruct(&shares[..3], 3).unwrap(), s);
            assert_eq!(reconstruct(&shares, 3).unwrap(), s);
        }
    }

    #[test]
    fn linear_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let a = random_vec(&mut rng, 2);
        let b = random_vec(&mut rng, 2);
        let sa = share(&a, 3, 5, &mut rng).unwrap();
        let sb = share(&b, 3, 5, &mut rng).unwrap();
        let summed: Vec<ShareOf> =
            sa.iter().zip(&sb).map(|(x, y)| ShareOf { party: x.party, value: &x.value + &y.value }).collect();
        assert_eq!(reconstruct(&summed[1..4], 3).unwrap(), &a + &b);
    }

    #[test]
    fn per_coefficient_independence() {
        // permuting the coefficients of every share gives a sharing of the
        // permuted secret
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let s = random_vec(&mut rng, 1);
        let shares = share(&s, 2, 3, &mut rng).unwrap();
        let perm: Vec<usize> = (0..N).rev().collect();
        let permute = |v: &PolyVec| {
            let c: Vec<u32> = v.coeffs().collect();
            PolyVec::from_coeff_iter(1, perm.iter().map(|&i| c[i]))
        };
        let permuted: Vec<ShareOf> =
            shares.iter().map(|sh| ShareOf { party: sh.party, value: permute(&sh.value) }).collect();
        assert_eq!(reconstruct(&permuted[..2], 2).unwrap(), permute(&s));
    }

    #[test]
    fn fewer_than_threshold_shares_leave_secret_uniform() {
        // With T-1 = 1 known share of a T = 2 sharing, every candidate value
        // of the missing share yields a distinct secret, so the implied
        // secret is uniform when the missing share is uniform.
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let s = PolyVec::from_coeff_iter(1, std::iter::repeat(12345));
        let shares = share(&s, 2, 2, &mut rng).unwrap();
        let known = &shares[0];
        let buckets = 16usize;
        let mut hist = vec![0u32; buckets];
        let trials = 16_000;
        for _ in 0..trials {
            let guess = random_vec(&mut rng, 1);
            let cand = reconstruct(&[known.clone(), ShareOf { party: 2, value: guess }], 2).unwrap();
            let c = cand.polys()[0].coeffs()[0];
            hist[(c as u64 * buckets as u64 / Q as u64) as usize] += 1;
        }
        let expected = trials as f64 / buckets as f64;
        let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        // 15 degrees of freedom, p = 0.001 critical value
        assert!(chi2 < 37.7, "chi2 = {chi2}");
    }
}
