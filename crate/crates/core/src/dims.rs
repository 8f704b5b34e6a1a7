//! Closed-form dimension sequences `d^ur`, `d^Iw`, `d^new` and the ghost
//! multiplicity pattern `m_n(k)`.
//!
//! The closed forms are taken as the definitions here:
//!
//! ```text
//! d_k^Iw = 2 k_• + 2 - 2δ
//! d_k^ur = ⌊(k_• - t₁)/(p+1)⌋ + ⌊(k_• - t₂)/(p+1)⌋ + 2
//! d_k^new = d_k^Iw - 2 d_k^ur
//! ```
//!
//! with floors toward `-∞`. They satisfy the sandwich bound
//! `2k_•/(p+1) - 2 <= d^ur <= 2k_•/(p+1) + 2`, which is what makes every
//! coefficient of the ghost series a finite product: the support window
//! [`WeightClass::support`] derived from it is certified to contain all
//! weights with a nonzero exponent.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use crate::params::WeightClass;

/// An arithmetic weight of the class, stored through `k_•` with
/// `k = k_ε + k_•(p-1)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(BigUint);

impl Weight {
    pub fn new(k_bullet: BigUint) -> Self {
        Weight(k_bullet)
    }

    pub fn from_u64(k_bullet: u64) -> Self {
        Weight(BigUint::from(k_bullet))
    }

    pub fn k_bullet(&self) -> &BigUint {
        &self.0
    }
}

impl std::fmt::Display for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "k_bullet={}", self.0)
    }
}

/// The three dimension values at one weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimTriple {
    pub d_ur: BigUint,
    pub d_iw: BigUint,
    pub d_new: BigUint,
}

impl WeightClass {
    /// `d_k^Iw = 2k_• + 2 - 2δ`.
    pub fn d_iw(&self, w: &Weight) -> BigUint {
        let v: BigInt = BigInt::from(w.k_bullet().clone()) * BigInt::from(2)
            + BigInt::from(2 - 2 * self.delta() as i64);
        v.to_biguint().expect("d_iw is non-negative")
    }

    /// `d_k^ur` by the two-floor formula, floors toward `-∞`.
    pub fn d_ur(&self, w: &Weight) -> BigUint {
        let kb = BigInt::from(w.k_bullet().clone());
        let pp1 = BigInt::from(self.p() + 1);
        let v: BigInt = (kb.clone() - BigInt::from(self.t1())).div_floor(&pp1)
            + (kb - BigInt::from(self.t2())).div_floor(&pp1)
            + BigInt::from(2);
        assert!(
            !v.is_negative(),
            "d_ur negative at {w}; formula inconsistency"
        );
        v.to_biguint().unwrap()
    }

    /// All three dimensions at once.
    ///
    /// Aborts with a diagnostic if `d^new` comes out negative; the formulas
    /// never produce that for validated parameters, and a violation would
    /// invalidate every profile built downstream.
    pub fn dims(&self, w: &Weight) -> DimTriple {
        let d_ur = self.d_ur(w);
        let d_iw = self.d_iw(w);
        let twice_ur = &d_ur * 2u32;
        assert!(
            d_iw >= twice_ur,
            "d_new negative at {w} for (p,a,s)=({},{},{})",
            self.p(),
            self.a(),
            self.s()
        );
        let d_new = &d_iw - twice_ur;
        DimTriple { d_ur, d_iw, d_new }
    }

    /// Ghost exponent `m_n(k)`: `min(n - d^ur, d^Iw - d^ur - n)` strictly
    /// inside the interval `(d^ur, d^Iw - d^ur)`, zero outside.
    pub fn multiplicity(&self, n: u64, w: &Weight) -> u64 {
        let d_ur = BigInt::from(self.d_ur(w));
        let n_big = BigInt::from(n);
        if n_big <= d_ur {
            return 0;
        }
        let upper = BigInt::from(self.d_iw(w)) - &d_ur;
        if n_big >= upper {
            return 0;
        }
        let m = (&n_big - d_ur).min(upper - n_big);
        m.to_u64().expect("multiplicity bounded by n")
    }

    /// Inclusive `k_•` window `[0, ⌈(p+1)(n+2)/2⌉]` containing every weight
    /// with `m_n(k) > 0`.
    pub fn support(&self, n: u64) -> std::ops::RangeInclusive<u64> {
        0..=self.support_end(n)
    }

    pub(crate) fn support_end(&self, n: u64) -> u64 {
        let w = ((self.p() as u128 + 1) * (n as u128 + 2)).div_ceil(2);
        w.to_u64().expect("support window exceeds u64")
    }
}

// u64 kernels for the table-driven scan paths. Same formulas as the BigUint
// methods above; the two are cross-checked by tests.
pub(crate) fn d_ur_small(p: u64, t1: u64, t2: u64, k_bullet: u64) -> u64 {
    let pp1 = (p + 1) as i64;
    let kb = k_bullet as i64;
    let v = (kb - t1 as i64).div_euclid(pp1) + (kb - t2 as i64).div_euclid(pp1) + 2;
    debug_assert!(v >= 0);
    v as u64
}

pub(crate) fn d_iw_small(delta: u64, k_bullet: u64) -> u64 {
    2 * k_bullet + 2 - 2 * delta
}
