//! Parameter validation and the derived constants `(δ, t₁, t₂, k_ε)`.
//!
//! A [`GhostParams`] triple `(p, a, s)` seeds everything else in the crate.
//! The twist parameter `b` is fixed to 0 throughout: the quantities computed
//! here depend only on `(p, a, s)`.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dims::Weight;

/// Validated input parameters.
///
/// `strict` validation requires `p >= 11`; relaxed validation admits
/// `p >= 7`, flagging the result as outside the range where the slope
/// theorems hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GhostParams {
    pub p: u64,
    pub a: u64,
    pub s: u64,
    /// Set when relaxed validation admitted a prime below the strict bound.
    pub outside_theorem_range: bool,
}

/// Constants derived from `(p, a, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// `k_ε = {a+2s} + 2`, in `{2, ..., p}`.
    pub k_eps: u64,
    /// `δ = ({a+s} + s - {a+2s}) / (p-1)`, always 0 or 1.
    pub delta: u64,
    pub t1: u64,
    pub t2: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamViolation {
    #[error("p = {0} is not prime")]
    NotPrime(u64),
    #[error("p = {p} is below the minimum {min}")]
    PrimeTooSmall { p: u64, min: u64 },
    #[error("a = {a} out of range (need 2 <= a <= p-5 = {max})")]
    AOutOfRange { a: u64, max: u64 },
    #[error("s = {s} out of range (need 0 <= s <= p-2 = {max})")]
    SOutOfRange { s: u64, max: u64 },
}

/// All constraint violations found by [`validate`], reported together.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct InvalidParams {
    pub violations: Vec<ParamViolation>,
}

impl std::fmt::Display for InvalidParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "invalid parameters: {}", msgs.join("; "))
    }
}

/// Deterministic Miller-Rabin for u64 (the 12-base set is exact below 2^64).
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    let mul_mod = |x: u64, y: u64| ((x as u128 * y as u128) % n as u128) as u64;
    let pow_mod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul_mod(acc, base);
            }
            base = mul_mod(base, base);
            exp >>= 1;
        }
        acc
    };
    'witness: for w in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(w, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Validate `(p, a, s)`, collecting every violated constraint.
pub fn validate(p: u64, a: u64, s: u64, strict: bool) -> Result<GhostParams, InvalidParams> {
    let mut violations = Vec::new();
    if !is_prime(p) {
        violations.push(ParamViolation::NotPrime(p));
    }
    let min_p = if strict { 11 } else { 7 };
    if p < min_p {
        violations.push(ParamViolation::PrimeTooSmall { p, min: min_p });
    }
    let a_max = p.saturating_sub(5);
    if a < 2 || a > a_max {
        violations.push(ParamViolation::AOutOfRange { a, max: a_max });
    }
    let s_max = p.saturating_sub(2);
    if s > s_max {
        violations.push(ParamViolation::SOutOfRange { s, max: s_max });
    }
    if violations.is_empty() {
        Ok(GhostParams {
            p,
            a,
            s,
            outside_theorem_range: p < 11,
        })
    } else {
        Err(InvalidParams { violations })
    }
}

impl GhostParams {
    /// Strict validation (`p >= 11`).
    pub fn new(p: u64, a: u64, s: u64) -> Result<Self, InvalidParams> {
        validate(p, a, s, true)
    }
}

/// The residue `{n}` of `n` modulo `p-1`, taken in `[0, p-2]`.
pub fn residue_mod_pm1(p: u64, n: i64) -> u64 {
    let m = (p - 1) as i128;
    (((n as i128 % m) + m) % m) as u64
}

/// Derive `(k_ε, δ, t₁, t₂)` from validated parameters.
///
/// Panics if the computed `δ` falls outside `{0, 1}`; that can only happen
/// through a formula transcription bug, never for validated input.
pub fn derive(params: &GhostParams) -> DerivedConstants {
    let p = params.p as i128;
    let a = params.a as i128;
    let s = params.s as i128;
    let r = |n: i128| n.rem_euclid(p - 1);
    let numerator = r(a + s) + s - r(a + 2 * s);
    assert!(
        numerator % (p - 1) == 0 && (0..=1).contains(&(numerator / (p - 1))),
        "internal error: delta = {}/{} for (p,a,s)=({},{},{})",
        numerator,
        p - 1,
        p,
        a,
        s
    );
    let delta = (numerator / (p - 1)) as u64;
    let (t1, t2) = if a + s < p - 1 {
        (s as u64 + delta, (a + s) as u64 + delta + 2)
    } else {
        (r(a + s) as u64 + delta + 1, s as u64 + delta + 1)
    };
    DerivedConstants {
        k_eps: r(a + 2 * s) as u64 + 2,
        delta,
        t1,
        t2,
    }
}

/// A parameter triple together with its derived constants: the full data
/// describing one class of weights `k = k_ε + k_•(p-1)`.
///
/// Immutable after construction and freely shareable across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightClass {
    params: GhostParams,
    consts: DerivedConstants,
}

impl WeightClass {
    pub fn new(params: GhostParams) -> Self {
        let consts = derive(&params);
        WeightClass { params, consts }
    }

    pub fn params(&self) -> &GhostParams {
        &self.params
    }

    pub fn consts(&self) -> &DerivedConstants {
        &self.consts
    }

    pub fn p(&self) -> u64 {
        self.params.p
    }

    pub fn a(&self) -> u64 {
        self.params.a
    }

    pub fn s(&self) -> u64 {
        self.params.s
    }

    pub fn k_eps(&self) -> u64 {
        self.consts.k_eps
    }

    pub fn delta(&self) -> u64 {
        self.consts.delta
    }

    pub fn t1(&self) -> u64 {
        self.consts.t1
    }

    pub fn t2(&self) -> u64 {
        self.consts.t2
    }

    /// `β_n`: depends only on the parity of `n`.
    pub fn beta(&self, n: i64) -> i64 {
        if n.rem_euclid(2) == 0 {
            self.consts.t1 as i64
        } else {
            self.consts.t2 as i64 - (self.params.p as i64 + 1) / 2
        }
    }

    /// `θ_n = β_{n-1} - β_n + (p+1)/2`; always `a+2` or `p-1-a`.
    pub fn theta(&self, n: i64) -> u64 {
        let v = self.beta(n - 1) - self.beta(n) + (self.params.p as i64 + 1) / 2;
        debug_assert!(
            v == self.params.a as i64 + 2 || v == self.params.p as i64 - 1 - self.params.a as i64
        );
        v as u64
    }

    /// `η_n = ((p-1)/2) k_• - ((p+1)/2) δ + β_n - 1`.
    pub fn eta(&self, n: i64, k_bullet: &BigUint) -> BigInt {
        let p = self.params.p;
        let half_pm1 = BigInt::from((p - 1) / 2);
        let half_pp1 = p.div_ceil(2);
        half_pm1 * BigInt::from(k_bullet.clone()) - BigInt::from(half_pp1 * self.consts.delta)
            + BigInt::from(self.beta(n))
            - 1
    }

    /// The weight `k = k_ε + k_•(p-1)` attached to `w`.
    pub fn k_of(&self, w: &Weight) -> BigUint {
        BigUint::from(self.consts.k_eps) + w.k_bullet() * BigUint::from(self.params.p - 1)
    }

    /// Resolve a weight from its value `k`, which must be `>= k_ε` and
    /// congruent to `k_ε` modulo `p-1`.
    pub fn weight_from_k(&self, k: &BigUint) -> Option<Weight> {
        let k_eps = BigUint::from(self.consts.k_eps);
        if *k < k_eps {
            return None;
        }
        let diff = k - k_eps;
        let pm1 = BigUint::from(self.params.p - 1);
        if !(&diff % &pm1).is_zero() {
            return None;
        }
        Some(Weight::new(diff / pm1))
    }

    /// Convenience for small `k_bullet` values.
    pub fn weight(&self, k_bullet: u64) -> Weight {
        Weight::new(BigUint::from(k_bullet))
    }

    pub(crate) fn k_of_small(&self, k_bullet: u64) -> u64 {
        self.consts.k_eps + k_bullet * (self.params.p - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_in_range() {
        let p = validate(11, 2, 0, true).unwrap();
        assert_eq!((p.p, p.a, p.s), (11, 2, 0));
        assert!(!p.outside_theorem_range);
    }

    #[test]
    fn validate_rejects_a_out_of_range() {
        // p - 5 = 6, so a = 7 is one past the top.
        let err = validate(11, 7, 0, true).unwrap_err();
        assert_eq!(
            err.violations,
            vec![ParamViolation::AOutOfRange { a: 7, max: 6 }]
        );
    }

    #[test]
    fn validate_rejects_composite_p() {
        let err = validate(12, 2, 0, true).unwrap_err();
        assert!(err.violations.contains(&ParamViolation::NotPrime(12)));
    }

    #[test]
    fn validate_collects_multiple_violations() {
        let err = validate(12, 8, 30, true).unwrap_err();
        assert_eq!(err.violations.len(), 3);
    }

    #[test]
    fn relaxed_mode_admits_p7_with_flag() {
        assert!(validate(7, 2, 0, true).is_err());
        let p = validate(7, 2, 0, false).unwrap();
        assert!(p.outside_theorem_range);
    }

    #[test]
    fn residues() {
        assert_eq!(residue_mod_pm1(11, 12), 2);
        assert_eq!(residue_mod_pm1(11, -1), 9);
        assert_eq!(residue_mod_pm1(11, 20), 0);
    }

    #[test]
    fn derive_hand_values() {
        // (p=11, a=2, s=0): {a+s}=2, {a+2s}=2, so delta=0; row a+s<p-1
        // gives t1=0, t2=4; k_eps = {2}+2 = 4.
        let c = derive(&validate(11, 2, 0, true).unwrap());
        assert_eq!((c.delta, c.t1, c.t2, c.k_eps), (0, 0, 4, 4));

        // (p=11, a=2, s=9): {11}=1, {20}=0, delta=(1+9-0)/10=1; row a+s>=p-1
        // gives t1={11}+1+1=3, t2=9+1+1=11; k_eps = {20}+2 = 2.
        let c = derive(&validate(11, 2, 9, true).unwrap());
        assert_eq!((c.delta, c.t1, c.t2, c.k_eps), (1, 3, 11, 2));

        // (p=13, a=2, s=0): same first row shape, different prime.
        let c = derive(&validate(13, 2, 0, true).unwrap());
        assert_eq!((c.delta, c.t1, c.t2, c.k_eps), (0, 0, 4, 4));
    }

    #[test]
    fn beta_theta_eta_hand_values() {
        let class = WeightClass::new(validate(11, 2, 0, true).unwrap());
        assert_eq!(class.beta(0), 0);
        assert_eq!(class.beta(1), -2);
        assert_eq!(class.beta(2), 0);
        assert_eq!(class.theta(0), 4); // a + 2
        assert_eq!(class.theta(1), 8); // p - 1 - a
                                       // eta_even(k_bullet = 3) = 5*3 - 6*0 + 0 - 1 = 14
        assert_eq!(class.eta(0, &BigUint::from(3u32)), BigInt::from(14));
    }

    #[test]
    fn theta_at_most_p_minus_3() {
        let class = WeightClass::new(validate(11, 2, 9, true).unwrap());
        for n in 0..4 {
            assert!(class.theta(n) <= 11 - 3);
        }
    }

    #[test]
    fn identities_hold_over_full_legal_range() {
        for p in [11u64, 13, 17] {
            for a in 2..=p - 5 {
                for s in 0..=p - 2 {
                    let params = validate(p, a, s, true).unwrap();
                    let c = derive(&params);
                    assert!(c.delta <= 1);
                    let rhs = s + residue_mod_pm1(p, (a + s) as i64) + 2 + 2 * c.delta;
                    assert_eq!(c.t1 + c.t2, rhs, "t1+t2 identity at ({p},{a},{s})");
                    let gap = c.t2 as i64 - c.t1 as i64;
                    assert!(
                        (4..=(p as i64 - 3)).contains(&gap),
                        "t2-t1 at ({p},{a},{s})"
                    );
                    let class = WeightClass::new(params);
                    for n in 0..2 {
                        let th = class.theta(n);
                        assert!(th == a + 2 || th == p - 1 - a);
                    }
                }
            }
        }
    }

    #[test]
    fn weight_from_k_roundtrip() {
        let class = WeightClass::new(validate(11, 2, 0, true).unwrap());
        let w = class.weight_from_k(&BigUint::from(14u32)).unwrap();
        assert_eq!(w.k_bullet(), &BigUint::from(1u32));
        assert_eq!(class.k_of(&w), BigUint::from(14u32));
        assert!(class.weight_from_k(&BigUint::from(15u32)).is_none());
        assert!(class.weight_from_k(&BigUint::from(3u32)).is_none());
    }
}
