//! ML-DSA parameter sets.
//!
//! Only ML-DSA-65 is wired through the protocol; the struct keeps the shape
//! general so the other FIPS 204 levels can be described the same way.

/// Ring degree.
pub const N: usize = 256;
/// Prime modulus, `2^23 - 2^13 + 1`.
pub const Q: u32 = 8_380_417;
/// Rows of `A` (length of `s2`, `w`, `t`).
pub const K: usize = 6;
/// Columns of `A` (length of `s1`, `y`, `z`).
pub const L: usize = 5;
pub const ETA: u32 = 4;
pub const GAMMA1: u32 = 1 << 19;
pub const GAMMA2: u32 = (Q - 1) / 32;
pub const TAU: usize = 49;
pub const BETA: u32 = TAU as u32 * ETA;
/// Dropped bits of `t`.
pub const D: u32 = 13;
/// Maximum number of set hint bits.
pub const OMEGA: usize = 55;
/// Length of the challenge hash `c_tilde` in bytes (lambda / 4).
pub const C_TILDE_BYTES: usize = 48;

/// Bits per packed `z` coefficient.
pub const Z_BITS: usize = 20;
/// Bits per packed `t1` coefficient.
pub const T1_BITS: usize = 23 - D as usize;
/// Bytes per packed `w1` polynomial (4 bits per coefficient).
pub const W1_POLY_BYTES: usize = N * 4 / 8;

pub const SIGNATURE_BYTES: usize = C_TILDE_BYTES + L * N * Z_BITS / 8 + OMEGA + K;
pub const PUBLIC_KEY_BYTES: usize = 32 + K * N * T1_BITS / 8;

/// Bound checked by the r0 test on low bits: `gamma2 - beta`.
pub const R0_BOUND: u32 = GAMMA2 - BETA;
/// Bound checked on the response: `gamma1 - beta`.
pub const Z_BOUND: u32 = GAMMA1 - BETA;

/// Full description of an ML-DSA parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSet {
    pub name: &'static str,
    pub n: usize,
    pub q: u32,
    pub k: usize,
    pub l: usize,
    pub eta: u32,
    pub gamma1: u32,
    pub gamma2: u32,
    pub tau: usize,
    pub beta: u32,
    pub d: u32,
    pub omega: usize,
    pub c_tilde_bytes: usize,
}

impl ParamSet {
    pub const fn signature_bytes(&self) -> usize {
        let z_bits = if self.gamma1 == 1 << 17 { 18 } else { 20 };
        self.c_tilde_bytes + self.l * self.n * z_bits / 8 + self.omega + self.k
    }
}

pub const ML_DSA_44: ParamSet = ParamSet {
    name: "ML-DSA-44",
    n: 256,
    q: Q,
    k: 4,
    l: 4,
    eta: 2,
    gamma1: 1 << 17,
    gamma2: (Q - 1) / 88,
    tau: 39,
    beta: 78,
    d: 13,
    omega: 80,
    c_tilde_bytes: 32,
};

pub const ML_DSA_65: ParamSet = ParamSet {
    name: "ML-DSA-65",
    n: N,
    q: Q,
    k: K,
    l: L,
    eta: ETA,
    gamma1: GAMMA1,
    gamma2: GAMMA2,
    tau: TAU,
    beta: BETA,
    d: D,
    omega: OMEGA,
    c_tilde_bytes: C_TILDE_BYTES,
};

pub const ML_DSA_87: ParamSet = ParamSet {
    name: "ML-DSA-87",
    n: 256,
    q: Q,
    k: 8,
    l: 7,
    eta: 2,
    gamma1: 1 << 19,
    gamma2: (Q - 1) / 32,
    tau: 60,
    beta: 120,
    d: 13,
    omega: 75,
    c_tilde_bytes: 64,
};
