//! Boolean circuits over bit-sliced shared words (least significant bit first).

use super::binary::{bitslice, BinaryEngine, SharedBits};
use super::edabits::EDA_BITS;
use crate::error::Result;
use crate::params::Q;
use crate::ring::rounding::ALPHA;

/// A shared `EDA_BITS`-bit integer per lane.
pub type SharedWord = Vec<SharedBits>;

/// `(q - 1) / 2`: values above it are negative as centered representatives.
const HALF_Q: u32 = (Q - 1) / 2;

fn bit(c: u32, k: usize) -> bool {
    (c >> k) & 1 == 1
}

fn public_plane(eng: &BinaryEngine<'_>, lanes: usize, b: bool) -> SharedBits {
    SharedBits::constant(eng.parties(), lanes, b)
}

/// `p - r` for public `p` and shared `r`, returning the low bits and the final borrow (`p < r`).
pub fn sub_public_shared(
    eng: &mut BinaryEngine<'_>,
    p: &[Vec<u64>],
    r: &[SharedBits],
) -> Result<(SharedWord, SharedBits)> {
    let lanes = r[0].lanes();
    let mut borrow = public_plane(eng, lanes, false);
    let mut out = Vec::with_capacity(r.len());
    for (k, rk) in r.iter().enumerate() {
        out.push(rk.xor(&borrow).xor_public(&p[k]));
        // borrow' = (r & b) ^ ((r ^ b) & !p)
        let not_p: Vec<u64> = p[k].iter().map(|w| !w).collect();
        let rb = eng.and(rk, &borrow)?;
        borrow = rb.xor(&rk.xor(&borrow).and_public(&not_p));
    }
    Ok((out, borrow))
}

/// `x + cond * c mod 2^width` for a public constant `c`.
pub fn add_const_if(eng: &mut BinaryEngine<'_>, x: &[SharedBits], c: u32, cond: &SharedBits) -> Result<SharedWord> {
    let lanes = cond.lanes();
    let zero = public_plane(eng, lanes, false);
    let mut carry = zero.clone();
    let mut out = Vec::with_capacity(x.len());
    for (k, xk) in x.iter().enumerate() {
        let a = if bit(c, k) { cond } else { &zero };
        out.push(xk.xor(a).xor(&carry));
        if k + 1 < x.len() {
            // carry' = carry ^ ((x ^ carry) & (a ^ carry))
            let t = eng.and(&xk.xor(&carry), &a.xor(&carry))?;
            carry = carry.xor(&t);
        }
    }
    Ok(out)
}

/// Arithmetic-to-binary: binary shares of `masked - r mod q` from the public
/// opening and the binary half of the edaBits. A borrow out of the top bit
/// means the integer difference was negative, so `q` is added back.
pub fn a2b_subtract(eng: &mut BinaryEngine<'_>, masked: &[u32], r_bits: &[SharedBits]) -> Result<SharedWord> {
    let planes = bitslice(masked, EDA_BITS);
    let (diff, borrow) = sub_public_shared(eng, &planes, r_bits)?;
    add_const_if(eng, &diff, Q, &borrow)
}

/// `x < c_i` for several public constants at once, evaluated LSB first.
pub fn lt_consts(eng: &mut BinaryEngine<'_>, x: &[SharedBits], consts: &[u32]) -> Result<Vec<SharedBits>> {
    let lanes = x[0].lanes();
    let mut lt: Vec<SharedBits> = consts.iter().map(|_| public_plane(eng, lanes, false)).collect();
    for (k, xk) in x.iter().enumerate() {
        // c_k = 1: lt' = !(x & !lt);  c_k = 0: lt' = !x & lt
        let lhs: Vec<SharedBits> =
            consts.iter().map(|&c| if bit(c, k) { xk.clone() } else { xk.not() }).collect();
        let rhs: Vec<SharedBits> = consts.iter().zip(&lt).map(|(&c, l)| if bit(c, k) { l.not() } else { l.clone() }).collect();
        let pairs: Vec<(&SharedBits, &SharedBits)> = lhs.iter().zip(&rhs).collect();
        let prods = eng.and_layer(&pairs)?;
        lt = consts.iter().zip(prods).map(|(&c, p)| if bit(c, k) { p.not() } else { p }).collect();
    }
    Ok(lt)
}

/// `x - b` for a shared bit `b`; the caller guarantees no underflow.
pub fn sub_bit(eng: &mut BinaryEngine<'_>, x: &[SharedBits], b: &SharedBits) -> Result<SharedWord> {
    let mut borrow = b.clone();
    let mut out = Vec::with_capacity(x.len());
    for (k, xk) in x.iter().enumerate() {
        out.push(xk.xor(&borrow));
        if k + 1 < x.len() {
            borrow = eng.and(&xk.not(), &borrow)?;
        }
    }
    Ok(out)
}

/// `x >= c ? x - c : x` for a public constant `c`.
pub fn cond_sub_const(eng: &mut BinaryEngine<'_>, x: &[SharedBits], c: u32) -> Result<SharedWord> {
    let lanes = x[0].lanes();
    let mut borrow = public_plane(eng, lanes, false);
    let mut t = Vec::with_capacity(x.len());
    for (k, xk) in x.iter().enumerate() {
        let d = xk.xor(&borrow);
        if bit(c, k) {
            t.push(d.not());
            borrow = eng.and(xk, &borrow.not())?.not();
        } else {
            t.push(d);
            borrow = eng.and(&xk.not(), &borrow)?;
        }
    }
    // out = t ^ (borrow & (x ^ t)), all bits in one layer
    let diffs: Vec<SharedBits> = x.iter().zip(&t).map(|(a, b)| a.xor(b)).collect();
    let pairs: Vec<(&SharedBits, &SharedBits)> = diffs.iter().map(|d| (&borrow, d)).collect();
    let fixes = eng.and_layer(&pairs)?;
    Ok(t.iter().zip(&fixes).map(|(a, f)| a.xor(f)).collect())
}

/// Reduces `x in [0, q)` to `(x~) mod 2*gamma2` in `[0, 2*gamma2)`, where `x~` is
/// the centered representative of `x`. Since `q - 1 = 16 * 2*gamma2`, a negative
/// `x~ = x - q` is congruent to `x - 1`.
pub fn reduce_centered_mod_alpha(eng: &mut BinaryEngine<'_>, x: &[SharedBits]) -> Result<SharedWord> {
    let negative = lt_consts(eng, x, &[HALF_Q + 1])?.pop().expect("one constant").not();
    let mut y = sub_bit(eng, x, &negative)?;
    for mult in [8, 4, 2, 1] {
        y = cond_sub_const(eng, &y, mult * ALPHA)?;
    }
    Ok(y)
}

/// `|y|_centered < bound` for `y in [0, 2*gamma2)`: `y < bound` or `y > 2*gamma2 - bound`.
pub fn window_check(eng: &mut BinaryEngine<'_>, y: &[SharedBits], bound: u32) -> Result<SharedBits> {
    let [low, high_fail]: [SharedBits; 2] =
        lt_consts(eng, y, &[bound, ALPHA - bound + 1])?.try_into().expect("two constants");
    let high = high_fail.not();
    let both = eng.and(&low, &high)?;
    Ok(low.xor(&high).xor(&both))
}

/// Full coefficient predicate on binary shares of `w'`.
pub fn compare_lt(eng: &mut BinaryEngine<'_>, w_prime: &[SharedBits], bound: u32) -> Result<SharedBits> {
    let y = reduce_centered_mod_alpha(eng, w_prime)?;
    window_check(eng, &y, bound)
}

/// Conjunction of all lanes via a balanced tree of depth `ceil(log2 lanes)`.
pub fn and_tree(eng: &mut BinaryEngine<'_>, bits: &SharedBits) -> Result<SharedBits> {
    let mut cur = bits.clone();
    while cur.lanes() > 1 {
        let half = cur.lanes() / 2;
        let lo = cur.select(0, half);
        let hi = cur.select(half, half);
        let mut next = eng.and(&lo, &hi)?;
        if cur.lanes() % 2 == 1 {
            next = next.concat(&cur.select(2 * half, 1));
        }
        cur = next;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpc::binary::{pack_lanes, unbitslice, TriplePool};
    use crate::mpc::transcript::MpcTranscript;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn share_word(values: &[u32], parties: usize, rng: &mut ChaCha8Rng) -> SharedWord {
        bitslice(values, EDA_BITS).iter().map(|p| SharedBits::deal(parties, values.len(), p, rng)).collect()
    }

    fn open_word(w: &[SharedBits]) -> Vec<u32> {
        let planes: Vec<Vec<u64>> = w.iter().map(SharedBits::reveal).collect();
        unbitslice(&planes, w[0].lanes())
    }

    #[test]
    fn a2b_matches_modular_subtraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut masked: Vec<u32> = (0..500).map(|_| rng.gen_range(0..Q)).collect();
        let mut r: Vec<u32> = (0..500).map(|_| rng.gen_range(0..Q)).collect();
        // wrap cases: masked < r, r = 0, extremes
        masked[..6].copy_from_slice(&[0, 0, Q - 1, 5, 1, Q - 1]);
        r[..6].copy_from_slice(&[0, Q - 1, 0, 6, Q - 1, Q - 1]);
        let mut pool = TriplePool::new([0; 32], None);
        let mut tr = MpcTranscript::default();
        let mut eng = BinaryEngine::new(3, &mut pool, &mut tr);
        let rb = share_word(&r, 3, &mut rng);
        let out = open_word(&a2b_subtract(&mut eng, &masked, &rb).unwrap());
        for j in 0..masked.len() {
            assert_eq!(out[j], (masked[j] + Q - r[j]) % Q, "lane {j}");
        }
    }

    #[test]
    fn comparisons_and_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut x: Vec<u32> = (0..300).map(|_| rng.gen_range(0..Q)).collect();
        x[..5].copy_from_slice(&[0, HALF_Q, HALF_Q + 1, Q - 1, ALPHA]);
        let mut pool = TriplePool::new([0; 32], None);
        let mut tr = MpcTranscript::default();
        let mut eng = BinaryEngine::new(2, &mut pool, &mut tr);
        let sx = share_word(&x, 2, &mut rng);
        let lt = lt_consts(&mut eng, &sx, &[HALF_Q + 1, 1000]).unwrap();
        let (a, b) = (lt[0].reveal_lanes(), lt[1].reveal_lanes());
        let y = open_word(&reduce_centered_mod_alpha(&mut eng, &sx).unwrap());
        for j in 0..x.len() {
            assert_eq!(a[j], x[j] < HALF_Q + 1);
            assert_eq!(b[j], x[j] < 1000);
            let centered = if x[j] > HALF_Q { x[j] as i64 - Q as i64 } else { x[j] as i64 };
            assert_eq!(y[j] as i64, centered.rem_euclid(ALPHA as i64), "lane {j}");
        }
    }

    #[test]
    fn and_tree_depth_and_result() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for lanes in [1usize, 2, 3, 7, 64, 65, 1536] {
            for fail_at in [None, Some(0), Some(lanes - 1), Some(lanes / 2)] {
                let bits = pack_lanes((0..lanes).map(|j| Some(j) != fail_at), lanes);
                let mut pool = TriplePool::new([0; 32], None);
                let mut tr = MpcTranscript::default();
                let mut eng = BinaryEngine::new(3, &mut pool, &mut tr);
                let s = SharedBits::deal(3, lanes, &bits, &mut rng);
                let r = and_tree(&mut eng, &s).unwrap();
                assert_eq!(r.reveal_lanes(), vec![fail_at.is_none()]);
                assert_eq!(eng.depth(), (lanes as f64).log2().ceil() as usize);
            }
        }
    }
}
