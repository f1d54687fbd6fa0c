//! Arithmetic in `R_q = Z_q[X]/(X^256 + 1)` and vectors over it.

pub mod ntt;
pub mod rounding;

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::params::{N, Q};

/// Reduces a signed integer to its canonical representative in `[0, q)`.
#[inline]
pub fn reduce_i64(x: i64) -> u32 {
    x.rem_euclid(Q as i64) as u32
}

/// Centered representative of `x mod q` in `(-q/2, q/2]`.
#[inline]
pub fn centered(x: u32) -> i32 {
    debug_assert!(x < Q);
    if x > (Q - 1) / 2 {
        x as i32 - Q as i32
    } else {
        x as i32
    }
}

#[inline]
pub fn mul_mod(a: u32, b: u32) -> u32 {
    ((a as u64 * b as u64) % Q as u64) as u32
}

/// A polynomial in coefficient form, coefficients in `[0, q)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: [u32; N],
}

/// A polynomial in the NTT (evaluation) domain.
#[derive(Clone, PartialEq, Eq)]
pub struct NttPoly {
    evals: [u32; N],
}

impl Default for Poly {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}, {}, {}, ..]", self.coeffs[0], self.coeffs[1], self.coeffs[2])
    }
}

impl fmt::Debug for NttPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NttPoly[{}, {}, ..]", self.evals[0], self.evals[1])
    }
}

impl Poly {
    pub const fn zero() -> Self {
        Self { coeffs: [0; N] }
    }

    /// The constant polynomial `c mod q`.
    pub fn constant(c: i64) -> Self {
        let mut p = Self::zero();
        p.coeffs[0] = reduce_i64(c);
        p
    }

    /// The monomial `X^e` reduced modulo `X^256 + 1`.
    pub fn monomial(e: usize) -> Self {
        let mut p = Self::zero();
        let e = e % (2 * N);
        if e < N {
            p.coeffs[e] = 1;
        } else {
            p.coeffs[e - N] = Q - 1;
        }
        p
    }

    /// Builds a polynomial from already reduced coefficients.
    ///
    /// Panics if any coefficient is not in `[0, q)`.
    pub fn from_coeffs(coeffs: [u32; N]) -> Self {
        assert!(coeffs.iter().all(|&c| c < Q), "coefficient out of range");
        Self { coeffs }
    }

    pub fn from_signed(coeffs: &[i64]) -> Self {
        assert_eq!(coeffs.len(), N);
        let mut p = Self::zero();
        for (dst, &c) in p.coeffs.iter_mut().zip(coeffs) {
            *dst = reduce_i64(c);
        }
        p
    }

    pub fn from_fn(mut f: impl FnMut(usize) -> u32) -> Self {
        let mut p = Self::zero();
        for (i, c) in p.coeffs.iter_mut().enumerate() {
            *c = f(i) % Q;
        }
        p
    }

    pub fn coeffs(&self) -> &[u32; N] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [u32; N] {
        &mut self.coeffs
    }

    pub fn centered_coeffs(&self) -> [i32; N] {
        self.coeffs.map(centered)
    }

    /// Largest centered absolute coefficient.
    pub fn inf_norm(&self) -> u32 {
        self.coeffs.iter().map(|&c| centered(c).unsigned_abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn ntt(&self) -> NttPoly {
        let mut evals = self.coeffs;
        ntt::forward(&mut evals);
        NttPoly { evals }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.ntt().pointwise(&other.ntt()).inv_ntt()
    }

    pub fn scale(&self, s: u32) -> Poly {
        Poly { coeffs: self.coeffs.map(|c| mul_mod(c, s % Q)) }
    }
}

impl NttPoly {
    pub fn evals(&self) -> &[u32; N] {
        &self.evals
    }

    pub fn from_evals(evals: [u32; N]) -> Self {
        assert!(evals.iter().all(|&c| c < Q), "evaluation out of range");
        Self { evals }
    }

    pub fn zero() -> Self {
        Self { evals: [0; N] }
    }

    pub fn inv_ntt(&self) -> Poly {
        let mut coeffs = self.evals;
        ntt::inverse(&mut coeffs);
        Poly { coeffs }
    }

    pub fn pointwise(&self, other: &NttPoly) -> NttPoly {
        let mut out = [0u32; N];
        for i in 0..N {
            out[i] = mul_mod(self.evals[i], other.evals[i]);
        }
        NttPoly { evals: out }
    }

    /// `self += a * b` pointwise.
    pub fn mul_acc(&mut self, a: &NttPoly, b: &NttPoly) {
        for i in 0..N {
            let s = self.evals[i] as u64 + a.evals[i] as u64 * b.evals[i] as u64;
            self.evals[i] = (s % Q as u64) as u32;
        }
    }

    /// A polynomial is a unit in `R_q` iff none of its NTT components vanish.
    pub fn is_invertible(&self) -> bool {
        self.evals.iter().all(|&e| e != 0)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { coeffs: self.coeffs.map(|c| if c == 0 { 0 } else { Q - c }) }
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (a, &b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            let s = *a + b;
            *a = if s >= Q { s - Q } else { s };
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (a, &b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a = if *a >= b { *a - b } else { *a + Q - b };
        }
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(N))?;
        for c in &self.coeffs {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PolyVisitor;
        impl<'de> Visitor<'de> for PolyVisitor {
            type Value = Poly;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a sequence of {N} coefficients in [0, q)")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Poly, A::Error> {
                let mut p = Poly::zero();
                for i in 0..N {
                    let c: u32 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(i, &self))?;
                    if c >= Q {
                        return Err(de::Error::custom("coefficient out of range"));
                    }
                    p.coeffs[i] = c;
                }
                if seq.next_element::<u32>()?.is_some() {
                    return Err(de::Error::invalid_length(N + 1, &self));
                }
                Ok(p)
            }
        }
        deserializer.deserialize_seq(PolyVisitor)
    }
}

/// A vector of polynomials; length is `l` for the `s1 / y / z` side and `k`
/// for the `s2 / w / t` side.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
pub struct PolyVec {
    polys: Vec<Poly>,
}

impl PolyVec {
    pub fn zero(dim: usize) -> Self {
        Self { polys: vec![Poly::zero(); dim] }
    }

    pub fn from_polys(polys: Vec<Poly>) -> Self {
        Self { polys }
    }

    pub fn dim(&self) -> usize {
        self.polys.len()
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn polys_mut(&mut self) -> &mut [Poly] {
        &mut self.polys
    }

    pub fn into_polys(self) -> Vec<Poly> {
        self.polys
    }

    /// All coefficients in order, polynomial-major.
    pub fn coeffs(&self) -> impl Iterator<Item = u32> + '_ {
        self.polys.iter().flat_map(|p| p.coeffs.iter().copied())
    }

    pub fn from_coeff_iter(dim: usize, it: impl IntoIterator<Item = u32>) -> Self {
        let mut v = Self::zero(dim);
        let mut it = it.into_iter();
        for p in &mut v.polys {
            for c in p.coeffs.iter_mut() {
                *c = it.next().expect("not enough coefficients") % Q;
            }
        }
        v
    }

    pub fn inf_norm(&self) -> u32 {
        self.polys.iter().map(Poly::inf_norm).max().unwrap_or(0)
    }

    pub fn ntt(&self) -> Vec<NttPoly> {
        self.polys.iter().map(Poly::ntt).collect()
    }

    pub fn from_ntt(v: &[NttPoly]) -> Self {
        Self { polys: v.iter().map(NttPoly::inv_ntt).collect() }
    }

    /// Multiplies every component by the ring element `c`.
    pub fn mul_poly(&self, c: &Poly) -> PolyVec {
        let c_hat = c.ntt();
        self.mul_ntt(&c_hat)
    }

    pub fn mul_ntt(&self, c_hat: &NttPoly) -> PolyVec {
        Self { polys: self.polys.iter().map(|p| p.ntt().pointwise(c_hat).inv_ntt()).collect() }
    }

    pub fn scale(&self, s: u32) -> PolyVec {
        Self { polys: self.polys.iter().map(|p| p.scale(s)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.polys.iter().all(Poly::is_zero)
    }

    /// Packs every coefficient into 3 little-endian bytes (23 bits used).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.dim() * N * 3);
        for c in self.coeffs() {
            out.extend_from_slice(&c.to_le_bytes()[..3]);
        }
        out
    }

    pub fn from_bytes(dim: usize, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != dim * N * 3 {
            return None;
        }
        let mut v = Self::zero(dim);
        for (i, chunk) in bytes.chunks_exact(3).enumerate() {
            let c = u32::from_le_bytes([chunk[0], chunk[1], chunk[2], 0]);
            if c >= Q {
                return None;
            }
            v.polys[i / N].coeffs[i % N] = c;
        }
        Some(v)
    }
}

impl Add for &PolyVec {
    type Output = PolyVec;
    fn add(self, rhs: &PolyVec) -> PolyVec {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &PolyVec {
    type Output = PolyVec;
    fn sub(self, rhs: &PolyVec) -> PolyVec {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &PolyVec {
    type Output = PolyVec;
    fn neg(self) -> PolyVec {
        PolyVec { polys: self.polys.iter().map(|p| -p).collect() }
    }
}

impl AddAssign<&PolyVec> for PolyVec {
    fn add_assign(&mut self, rhs: &PolyVec) {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        for (a, b) in self.polys.iter_mut().zip(&rhs.polys) {
            *a += b;
        }
    }
}

impl SubAssign<&PolyVec> for PolyVec {
    fn sub_assign(&mut self, rhs: &PolyVec) {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        for (a, b) in self.polys.iter_mut().zip(&rhs.polys) {
            *a -= b;
        }
    }
}

impl<'a> std::iter::Sum<&'a PolyVec> for Option<PolyVec> {
    fn sum<I: Iterator<Item = &'a PolyVec>>(iter: I) -> Self {
        iter.fold(None, |acc, v| match acc {
            None => Some(v.clone()),
            Some(mut a) => {
                a += v;
                Some(a)
            }
        })
    }
}

impl std::iter::Sum<PolyVec> for Option<PolyVec> {
    fn sum<I: Iterator<Item = PolyVec>>(iter: I) -> Self {
        iter.reduce(|mut a, v| {
            a += &v;
            a
        })
    }
}

/// A `k x l` matrix over `R_q`, stored in the NTT domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: Vec<Vec<NttPoly>>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<NttPoly>>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[Vec<NttPoly>] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// `A * v` for `v` in coefficient form.
    pub fn mul_vec(&self, v: &PolyVec) -> PolyVec {
        assert_eq!(v.dim(), self.num_cols(), "dimension mismatch");
        let v_hat = v.ntt();
        let polys = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = NttPoly::zero();
                for (a, b) in row.iter().zip(&v_hat) {
                    acc.mul_acc(a, b);
                }
                acc.inv_ntt()
            })
            .collect();
        PolyVec::from_polys(polys)
    }
}
