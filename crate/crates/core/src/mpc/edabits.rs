//! edaBits: a random `r < q` shared both additively mod `q` and bitwise mod 2.

use rand::{CryptoRng, RngCore};

use super::arith::{AuthVec, MacKey};
use super::binary::{bitslice, unbitslice, SharedBits};
use crate::params::Q;

/// Bit length of `q`.
pub const EDA_BITS: usize = 23;

/// Expected fraction of 23-bit candidates rejected: `(2^23 - q) / 2^23`.
pub const RESAMPLE_RATE: f64 = ((1u64 << EDA_BITS) - Q as u64) as f64 / (1u64 << EDA_BITS) as f64;

/// Draws a uniform 23-bit value until it is below `q`; returns it with the number of rejections.
pub fn sample_below_q<R: RngCore>(rng: &mut R) -> (u32, u64) {
    let mut rejected = 0;
    loop {
        let r = rng.next_u32() & ((1 << EDA_BITS) - 1);
        if r < Q {
            return (r, rejected);
        }
        rejected += 1;
    }
}

/// A batch of `m` edaBits, one per lane.
#[derive(Clone, Debug)]
pub struct EdaBits {
    pub arith: AuthVec,
    /// Bit planes, least significant first.
    pub bits: Vec<SharedBits>,
    pub draws: u64,
    pub resamples: u64,
}

impl EdaBits {
    pub fn len(&self) -> usize {
        self.arith.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn binary_values(&self) -> Vec<u32> {
        let planes: Vec<Vec<u64>> = self.bits.iter().map(SharedBits::reveal).collect();
        unbitslice(&planes, self.len())
    }
}

/// Trusted-dealer generation of `m` edaBits with rejection sampling.
pub fn gen_edabits<R: RngCore + CryptoRng>(m: usize, key: &MacKey, rng: &mut R) -> EdaBits {
    let mut values = Vec::with_capacity(m);
    let mut resamples = 0;
    for _ in 0..m {
        let (r, rej) = sample_below_q(rng);
        values.push(r);
        resamples += rej;
    }
    let parties = key.parties();
    let arith = AuthVec::deal(&values, key, rng);
    let bits = bitslice(&values, EDA_BITS).iter().map(|plane| SharedBits::deal(parties, m, plane, rng)).collect();
    EdaBits { arith, bits, draws: m as u64 + resamples, resamples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpc::arith::combine;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn both_sharings_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let key = MacKey::random(3, &mut rng);
        let e = gen_edabits(300, &key, &mut rng);
        let parts: Vec<Vec<u32>> = (0..3).map(|p| e.arith.party_share(p).to_vec()).collect();
        let arith = combine(&parts);
        assert_eq!(e.binary_values(), arith);
        assert!(arith.iter().all(|&r| r < Q));
        assert_eq!(e.arith.open(&key).unwrap(), arith);
    }

    #[test]
    fn resample_rate_constant() {
        assert!((RESAMPLE_RATE - 8191.0 / 8_388_608.0).abs() < 1e-15);
    }
}
