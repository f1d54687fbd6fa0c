//! Two computation parties evaluating the r0-check.
//!
//! CP1 holds `(w, S1)`, CP2 holds `S2`, with `S1 + S2 = c*s2`. The garbled
//! circuit / OT layer is not implemented; [`IdealTwoParty`] evaluates the
//! functionality directly and is the only [`TwoPartyBackend`] provided.

use crate::params::R0_BOUND;
use crate::ring::rounding::low_bits_inf_norm;
use crate::ring::PolyVec;

pub trait TwoPartyBackend {
    /// Returns whether `w - s1 - s2` passes the r0-check. Each argument
    /// group is what one computation party contributes.
    fn evaluate(&mut self, cp1: (&PolyVec, &PolyVec), cp2: &PolyVec) -> bool;
}

/// Direct evaluation of the two-party functionality.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdealTwoParty;

impl TwoPartyBackend for IdealTwoParty {
    fn evaluate(&mut self, (w, s1): (&PolyVec, &PolyVec), s2: &PolyVec) -> bool {
        let w_prime = &(w - s1) - s2;
        low_bits_inf_norm(&w_prime) < R0_BOUND
    }
}

pub fn p3_check(w: &PolyVec, s1: &PolyVec, s2: &PolyVec) -> bool {
    IdealTwoParty.evaluate((w, s1), s2)
}
