//! Negacyclic NTT over `Z_q[X]/(X^256 + 1)`.
//!
//! `q = 8380417` is `1 mod 512`, so `X^256 + 1` splits completely into
//! linear factors `X - zeta^(2 brv(i) + 1)` with `zeta = 1753` a primitive
//! 512-th root of unity. Butterflies follow the FIPS 204 layer order.

use std::sync::OnceLock;

use crate::params::{N, Q};

/// Primitive 512-th root of unity mod q.
pub const ZETA: u32 = 1753;
/// `256^{-1} mod q`.
const N_INV: u64 = 8_347_681;

fn bit_reverse8(x: usize) -> usize {
    (x as u8).reverse_bits() as usize
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let q = Q as u64;
    let mut acc = 1u64;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

/// `zetas[i] = ZETA^brv8(i) mod q`.
pub(crate) fn zetas() -> &'static [u32; N] {
    static TABLE: OnceLock<[u32; N]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0u32; N];
        for (i, z) in t.iter_mut().enumerate() {
            *z = pow_mod(ZETA as u64, bit_reverse8(i) as u64) as u32;
        }
        t
    })
}

#[inline]
fn mul_mod(a: u32, b: u32) -> u32 {
    ((a as u64 * b as u64) % Q as u64) as u32
}

#[inline]
fn add_mod(a: u32, b: u32) -> u32 {
    let s = a + b;
    if s >= Q {
        s - Q
    } else {
        s
    }
}

#[inline]
fn sub_mod(a: u32, b: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + Q - b
    }
}

pub(crate) fn forward(w: &mut [u32; N]) {
    let z = zetas();
    let mut m = 0;
    let mut len = 128;
    while len >= 1 {
        let mut start = 0;
        while start < N {
            m += 1;
            let zeta = z[m];
            for j in start..start + len {
                let t = mul_mod(zeta, w[j + len]);
                w[j + len] = sub_mod(w[j], t);
                w[j] = add_mod(w[j], t);
            }
            start += 2 * len;
        }
        len /= 2;
    }
}

pub(crate) fn inverse(w: &mut [u32; N]) {
    let z = zetas();
    let mut m = N;
    let mut len = 1;
    while len < N {
        let mut start = 0;
        while start < N {
            m -= 1;
            let zeta = Q - z[m];
            for j in start..start + len {
                let t = w[j];
                w[j] = add_mod(t, w[j + len]);
                w[j + len] = mul_mod(zeta, sub_mod(t, w[j + len]));
            }
            start += 2 * len;
        }
        len *= 2;
    }
    for c in w.iter_mut() {
        *c = ((*c as u64 * N_INV) % Q as u64) as u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_has_order_512() {
        assert_eq!(pow_mod(ZETA as u64, 512), 1);
        assert_eq!(pow_mod(ZETA as u64, 256), Q as u64 - 1);
        assert_eq!(pow_mod(256, Q as u64 - 2), N_INV);
    }

    #[test]
    fn known_table_entries() {
        // first entries of the FIPS 204 zetas table (non-Montgomery form)
        let z = zetas();
        assert_eq!(z[0], 1);
        assert_eq!(z[1], 4_808_194);
        assert_eq!(z[2], 3_765_607);
        assert_eq!(z[3], 3_761_513);
    }
}
