//! Exact p-adic valuations, normalized so `v_p(p) = 1`.
//!
//! Only valuations are modeled, never p-adic numbers themselves: for two
//! weights in the same class, `v_p(w_k - w_{k'}) = v_p(k - k') + 1`, and that
//! difference of valuations is all the slope theory consumes.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::dims::Weight;
use crate::params::WeightClass;

/// A non-negative integer valuation or `+∞` (the valuation of 0, or of a
/// ghost coefficient with a vanishing factor).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedValuation {
    Finite(u64),
    Infinite,
}

impl ExtendedValuation {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedValuation::Finite(_))
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            ExtendedValuation::Finite(v) => Some(*v),
            ExtendedValuation::Infinite => None,
        }
    }
}

/// Addition with `+∞` absorbing.
impl std::ops::Add for ExtendedValuation {
    type Output = ExtendedValuation;

    fn add(self, other: ExtendedValuation) -> ExtendedValuation {
        match (self, other) {
            (ExtendedValuation::Finite(x), ExtendedValuation::Finite(y)) => {
                ExtendedValuation::Finite(x + y)
            }
            _ => ExtendedValuation::Infinite,
        }
    }
}

impl std::fmt::Display for ExtendedValuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedValuation::Finite(v) => write!(f, "{v}"),
            ExtendedValuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValuationError {
    #[error("v_p(0) is undefined; use ExtendedValuation at call sites")]
    ZeroArgument,
    #[error("interval [{lo}, {hi}] contains 0")]
    IntervalContainsZero { lo: i64, hi: i64 },
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: i64, hi: i64 },
}

/// Exact exponent of `p` in a nonzero integer; the sign is irrelevant.
pub fn vp(p: u64, n: &BigInt) -> Result<u64, ValuationError> {
    if n.is_zero() {
        return Err(ValuationError::ZeroArgument);
    }
    Ok(vp_big(
        p,
        &n.abs().to_biguint().expect("abs is non-negative"),
    ))
}

pub(crate) fn vp_big(p: u64, n: &BigUint) -> u64 {
    debug_assert!(!n.is_zero());
    let p_big = BigUint::from(p);
    let mut v = 0u64;
    let mut m = n.clone();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &p_big);
        if !r.is_zero() {
            return v;
        }
        v += 1;
        m = q;
    }
}

pub(crate) fn vp_u64(p: u64, mut n: u64) -> u64 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n.is_multiple_of(p) {
        v += 1;
        n /= p;
    }
    v
}

/// `v_p(w_k - w_{k'})` for two weights of the same class: `+∞` when they
/// coincide, otherwise `v_p(k_• - k'_•) + 1`.
pub fn vp_weight_diff(class: &WeightClass, k: &Weight, k_prime: &Weight) -> ExtendedValuation {
    if k == k_prime {
        return ExtendedValuation::Infinite;
    }
    let (lo, hi) = if k.k_bullet() < k_prime.k_bullet() {
        (k.k_bullet(), k_prime.k_bullet())
    } else {
        (k_prime.k_bullet(), k.k_bullet())
    };
    ExtendedValuation::Finite(vp_big(class.p(), &(hi - lo)) + 1)
}

/// The exact sum `Σ_{n=n1+1}^{n2} v_p(n)` together with the bracketing bounds
/// `(n2-n1)/p - 1 <= Σ <= (n2-n1)/(p-1) + r`, evaluated at the minimal
/// admissible `r` (the maximal valuation on the range).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumVpReport {
    pub sum: u64,
    pub r_min: u64,
    pub lower_bound_holds: bool,
    pub upper_bound_holds: bool,
}

/// Sum of valuations over the half-open range `(n1, n2]`.
///
/// The range must not contain 0.
pub fn sum_vp(p: u64, n1: i64, n2: i64) -> Result<SumVpReport, ValuationError> {
    if n1 >= n2 {
        return Err(ValuationError::EmptyInterval { lo: n1, hi: n2 });
    }
    if n1 < 0 && n2 >= 0 {
        return Err(ValuationError::IntervalContainsZero { lo: n1 + 1, hi: n2 });
    }
    let mut sum = 0u64;
    let mut r_min = 0u64;
    for n in (n1 + 1)..=n2 {
        let v = vp_u64(p, n.unsigned_abs());
        sum += v;
        r_min = r_min.max(v);
    }
    // lower: (n2-n1)/p - 1 <= sum  <=>  n2-n1 - p <= sum * p
    let len = (n2 - n1) as i128;
    let lower_bound_holds = len - p as i128 <= sum as i128 * p as i128;
    // upper: sum <= (n2-n1)/(p-1) + r  <=>  sum*(p-1) <= n2-n1 + r*(p-1)
    let pm1 = (p - 1) as i128;
    let upper_bound_holds = sum as i128 * pm1 <= len + r_min as i128 * pm1;
    Ok(SumVpReport {
        sum,
        r_min,
        lower_bound_holds,
        upper_bound_holds,
    })
}

/// Maximal `v_p` over the inclusive integer interval `[lo, hi]`, which must
/// not contain 0.
pub fn max_vp_interval(p: u64, lo: i64, hi: i64) -> Result<u64, ValuationError> {
    if lo > hi {
        return Err(ValuationError::EmptyInterval { lo, hi });
    }
    if lo <= 0 && hi >= 0 {
        return Err(ValuationError::IntervalContainsZero { lo, hi });
    }
    // The maximum is attained on the multiples of the largest power of p
    // fitting in the interval, so walk powers instead of the whole range.
    let (lo_u, hi_u) = if lo > 0 {
        (lo as u64, hi as u64)
    } else {
        (hi.unsigned_abs(), lo.unsigned_abs())
    };
    let mut best = 0u64;
    let mut q: u64 = 1;
    while let Some(next) = q.checked_mul(p) {
        q = next;
        // is there a multiple of q in [lo_u, hi_u]?
        if hi_u >= q && hi_u / q * q >= lo_u {
            best += 1;
        } else {
            break;
        }
    }
    Ok(best)
}
