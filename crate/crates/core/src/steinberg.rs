//! L-values, near-Steinberg ranges, maximality, and the correspondence
//! between maximal ranges and Newton-polygon segments.
//!
//! For an evaluation weight `w_⋆` and a weight `k` of the class, `L_{⋆,k}`
//! is the largest `L` in `[1, ½d^new]` with
//! `v_p(w_⋆ - w_k) >= Δ_{k,L} - Δ_{k,L-1}`; the hull gaps are nondecreasing
//! in `L`, so the qualifying set is an initial segment. Self-evaluation has
//! infinite valuation and takes the maximal `L = ½d^new`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::dims::Weight;
use crate::ghost::{delta_profile, DeltaProfile, GhostError};
use crate::newton::{certified_slopes, SlopeMultiset};
use crate::params::WeightClass;
use crate::tables::ClassTables;
use crate::valuation::{vp_weight_diff, ExtendedValuation};

/// The near-Steinberg range `(½d^Iw - L, ½d^Iw + L)` for a pair of weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsRange {
    pub k_bullet: BigUint,
    pub l: BigUint,
    /// Open interval endpoints, symmetric about `½d^Iw`.
    pub lo: BigInt,
    pub hi: BigInt,
}

impl NsRange {
    fn from_small(k_bullet: u64, l: u64, half_iw: u64) -> Self {
        NsRange {
            k_bullet: BigUint::from(k_bullet),
            l: BigUint::from(l),
            lo: BigInt::from(half_iw as i128 - l as i128),
            hi: BigInt::from(half_iw + l),
        }
    }

    pub fn contains_open(&self, x: &BigInt) -> bool {
        self.lo < *x && *x < self.hi
    }

    pub fn contains_closed(&self, x: &BigInt) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    /// True when the two open intervals are disjoint or one contains the
    /// other (equality counts as nested).
    pub fn nested_or_disjoint(&self, other: &NsRange) -> bool {
        let disjoint = self.hi <= other.lo || other.hi <= self.lo;
        let self_in_other = other.lo <= self.lo && self.hi <= other.hi;
        let other_in_self = self.lo <= other.lo && other.hi <= self.hi;
        disjoint || self_in_other || other_in_self
    }

    pub fn strictly_contains(&self, other: &NsRange) -> bool {
        self.lo <= other.lo && other.hi <= self.hi && (self.lo != other.lo || self.hi != other.hi)
    }

    pub fn endpoints_u64(&self) -> Option<(u64, u64)> {
        Some((self.lo.to_u64()?, self.hi.to_u64()?))
    }
}

/// Largest qualifying `L` read off a precomputed profile.
pub fn l_value_from_profile(
    class: &WeightClass,
    k_eval: &Weight,
    profile: &DeltaProfile,
) -> Option<u64> {
    let d = profile.radius();
    if d == 0 {
        return None;
    }
    let v = vp_weight_diff(class, k_eval, &profile.weight());
    let v_rat = match v {
        ExtendedValuation::Infinite => return Some(d),
        ExtendedValuation::Finite(v) => BigRational::from_integer(BigInt::from(v)),
    };
    // gaps are nondecreasing, so scan from the top
    (1..=d)
        .rev()
        .find(|&l| profile.gap(l).expect("l in range") <= v_rat)
}

/// `L_{w_eval, k}`: `None` when `d^new = 0` or no threshold is met.
pub fn l_value(
    class: &WeightClass,
    k_eval: &Weight,
    k: &Weight,
) -> Result<Option<BigUint>, GhostError> {
    let d_new = class.dims(k).d_new;
    let d = d_new / 2u32;
    if d.to_u64() == Some(0) {
        return Ok(None);
    }
    if k_eval == k {
        // infinite valuation clears every threshold
        return Ok(Some(d));
    }
    let profile = delta_profile(class, k)?;
    Ok(l_value_from_profile(class, k_eval, &profile).map(BigUint::from))
}

/// The near-Steinberg range for `(w_eval, k)`, when the L-value exists.
pub fn ns_range(
    class: &WeightClass,
    k_eval: &Weight,
    k: &Weight,
) -> Result<Option<NsRange>, GhostError> {
    let Some(l) = l_value(class, k_eval, k)? else {
        return Ok(None);
    };
    let half_iw = BigInt::from(class.d_iw(k) / 2u32);
    let l_int = BigInt::from(l.clone());
    Ok(Some(NsRange {
        k_bullet: k.k_bullet().clone(),
        l,
        lo: &half_iw - &l_int,
        hi: &half_iw + &l_int,
    }))
}

/// Every range with a generating weight in `k_bullet <= k_bullet_max`,
/// ordered by generating weight.
///
/// Candidates are pruned to `k_bullet ≡ k_eval (mod p)`: any range requires
/// `v_p(k - k_eval) >= 1`, a fact the verification harness re-checks without
/// this pruning.
pub fn all_ns_ranges(class: &WeightClass, k_eval: &Weight, k_bullet_max: u64) -> Vec<NsRange> {
    let p = class.p();
    let eval_residue = (k_eval.k_bullet() % p).to_u64().expect("residue fits");
    let tables = ClassTables::build(
        class,
        class.support_end(crate::dims::d_iw_small(class.delta(), k_bullet_max)),
    );
    let mut out = Vec::new();
    for kb in 0..=k_bullet_max {
        if kb % p != eval_residue {
            continue;
        }
        let profile = crate::ghost::profile_with_tables(class, &tables, kb);
        if let Some(l) = l_value_from_profile(class, k_eval, &profile) {
            out.push(NsRange::from_small(kb, l, profile.half_iw()));
        }
    }
    out
}

/// The ranges not strictly contained in any other range of the list.
pub fn maximal_ns_ranges(ranges: &[NsRange]) -> Vec<NsRange> {
    ranges
        .iter()
        .filter(|r| !ranges.iter().any(|c| c.strictly_contains(r)))
        .cloned()
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorrespondenceError {
    #[error("Newton polygon not certified up to the requested bound; refusing to match")]
    Uncertified,
    #[error(transparent)]
    Ghost(#[from] GhostError),
}

/// One matched (maximal range, polygon segment) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondencePair {
    pub lo: u64,
    pub hi: u64,
    pub k_bullet: BigUint,
    pub slope: BigRational,
    /// When the pair satisfies the top-gap hypothesis
    /// `v_p(w_eval - w_k) >= Δ_{k,D} - Δ_{k,D-1}`, records whether the
    /// segment slope equals `(k-2)/2` as it then must.
    pub steinberg_slope_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceReport {
    /// Certified prefix bound: matching is exhaustive for indices `<= anchor`.
    pub anchor: u64,
    pub pairs: Vec<CorrespondencePair>,
    /// Segments of length >= 2 in the certified prefix with no matching
    /// maximal range.
    pub unmatched_segments: Vec<(u64, u64)>,
    /// Maximal ranges inside the certified prefix with no matching segment.
    pub unmatched_ranges: Vec<(u64, u64, BigUint)>,
    pub multiset: SlopeMultiset,
}

impl CorrespondenceReport {
    pub fn ok(&self) -> bool {
        self.unmatched_segments.is_empty()
            && self.unmatched_ranges.is_empty()
            && self
                .pairs
                .iter()
                .all(|p| p.steinberg_slope_ok != Some(false))
    }
}

/// Match maximal near-Steinberg ranges against Newton-polygon segments over
/// the certified prefix.
pub fn vertex_correspondence(
    class: &WeightClass,
    k_eval: &Weight,
    slope_bound: &BigRational,
    n_max: u64,
) -> Result<CorrespondenceReport, CorrespondenceError> {
    let multiset = certified_slopes(class, k_eval, slope_bound, n_max);
    if !multiset.certified {
        return Err(CorrespondenceError::Uncertified);
    }
    let cert = multiset.certificate.as_ref().expect("certified");
    let anchor = cert.anchor.0;

    // Window soundness: past the window end, d^ur already exceeds the anchor,
    // so no further weight can generate a range inside the prefix.
    let window = class.support_end(anchor);
    assert!(
        crate::dims::d_ur_small(class.p(), class.t1(), class.t2(), window + 1) > anchor,
        "range search window too small for the certified prefix"
    );

    let ranges = all_ns_ranges(class, k_eval, window);
    let maximal = maximal_ns_ranges(&ranges);
    let in_prefix: Vec<(u64, u64, BigUint)> = maximal
        .iter()
        .filter_map(|r| {
            let (lo, hi) = r.endpoints_u64()?;
            (hi <= anchor).then_some((lo, hi, r.k_bullet.clone()))
        })
        .collect();

    let segments: Vec<((u64, u64), BigRational)> = cert
        .prefix_vertices
        .windows(2)
        .map(|w| {
            let ((x1, y1), (x2, y2)) = (w[0], w[1]);
            (
                (x1, x2),
                BigRational::new(BigInt::from(y2 as i128 - y1 as i128), BigInt::from(x2 - x1)),
            )
        })
        .collect();

    let mut pairs = Vec::new();
    let mut unmatched_ranges = Vec::new();
    let mut matched_segments = vec![false; segments.len()];
    for (lo, hi, kb) in &in_prefix {
        match segments
            .iter()
            .position(|((s_lo, s_hi), _)| s_lo == lo && s_hi == hi)
        {
            Some(i) if !matched_segments[i] => {
                matched_segments[i] = true;
                let slope = segments[i].1.clone();
                let k = Weight::new(kb.clone());
                let steinberg_slope_ok = top_gap_hypothesis(class, k_eval, &k)?.map(|_| {
                    let k_val = BigInt::from(class.k_of(&k));
                    slope == BigRational::new(k_val - 2, BigInt::from(2))
                });
                pairs.push(CorrespondencePair {
                    lo: *lo,
                    hi: *hi,
                    k_bullet: kb.clone(),
                    slope,
                    steinberg_slope_ok,
                });
            }
            _ => unmatched_ranges.push((*lo, *hi, kb.clone())),
        }
    }
    let unmatched_segments: Vec<(u64, u64)> = segments
        .iter()
        .zip(&matched_segments)
        .filter(|(((lo, hi), _), matched)| !**matched && hi - lo >= 2)
        .map(|((pair, _), _)| *pair)
        .collect();

    Ok(CorrespondenceReport {
        anchor,
        pairs,
        unmatched_segments,
        unmatched_ranges,
        multiset,
    })
}

/// Evaluates `v_p(w_eval - w_k) >= Δ_{k,D} - Δ_{k,D-1}`; `Ok(None)` when the
/// hypothesis fails or `d^new = 0`.
fn top_gap_hypothesis(
    class: &WeightClass,
    k_eval: &Weight,
    k: &Weight,
) -> Result<Option<()>, GhostError> {
    let profile = delta_profile(class, k)?;
    if profile.radius() == 0 {
        return Ok(None);
    }
    let holds = match vp_weight_diff(class, k_eval, k) {
        ExtendedValuation::Infinite => true,
        ExtendedValuation::Finite(v) => {
            BigRational::from_integer(BigInt::from(v)) >= profile.gap(profile.radius()).unwrap()
        }
    };
    Ok(holds.then_some(()))
}

/// Outcome of one exclusion test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionOutcome {
    /// False when `k' = k`, the L-value is absent, or the valuation
    /// hypothesis fails; the check is then vacuous.
    pub hypothesis_held: bool,
    pub ok: bool,
    pub violation: Option<String>,
}

/// Check the exclusions forced on a third weight `k'`: when
/// `v_p(w_{k'} - w_k) >= Δ_{k,L} - Δ_{k,L-1}` for `L = L_{w_eval,k}`, neither
/// `½d^Iw_{k'}` (closed) nor `d^ur_{k'}`, `d^Iw_{k'}-d^ur_{k'}` (open) may
/// meet the near-Steinberg range of `(w_eval, k)`.
pub fn exclusion_check(
    class: &WeightClass,
    k_eval: &Weight,
    k: &Weight,
    k_prime: &Weight,
) -> Result<ExclusionOutcome, GhostError> {
    const VACUOUS: ExclusionOutcome = ExclusionOutcome {
        hypothesis_held: false,
        ok: true,
        violation: None,
    };
    if k == k_prime {
        return Ok(VACUOUS);
    }
    let profile = delta_profile(class, k)?;
    let Some(l) = l_value_from_profile(class, k_eval, &profile) else {
        return Ok(VACUOUS);
    };
    let half_iw = BigInt::from(profile.half_iw());
    let l_int = BigInt::from(l);
    let range = NsRange {
        k_bullet: k.k_bullet().clone(),
        l: BigUint::from(l),
        lo: &half_iw - &l_int,
        hi: &half_iw + &l_int,
    };
    let gap = profile.gap(l).expect("L within radius");
    let hyp = match vp_weight_diff(class, k_prime, k) {
        ExtendedValuation::Infinite => unreachable!("k != k_prime"),
        ExtendedValuation::Finite(v) => BigRational::from_integer(BigInt::from(v)) >= gap,
    };
    if !hyp {
        return Ok(VACUOUS);
    }
    let dims = class.dims(k_prime);
    let half_iw = BigInt::from(dims.d_iw.clone() / 2u32);
    let d_ur = BigInt::from(dims.d_ur.clone());
    let d_comp = BigInt::from(dims.d_iw - dims.d_ur);
    let mut violation = None;
    if range.contains_closed(&half_iw) {
        violation = Some(format!(
            "half d_iw = {half_iw} of k'_bullet={} in closed range ({}, {}) of k_bullet={}",
            k_prime.k_bullet(),
            range.lo,
            range.hi,
            k.k_bullet()
        ));
    } else if range.contains_open(&d_ur) {
        violation = Some(format!(
            "d_ur = {d_ur} of k'_bullet={} in open range ({}, {}) of k_bullet={}",
            k_prime.k_bullet(),
            range.lo,
            range.hi,
            k.k_bullet()
        ));
    } else if range.contains_open(&d_comp) {
        violation = Some(format!(
            "d_iw - d_ur = {d_comp} of k'_bullet={} in open range ({}, {}) of k_bullet={}",
            k_prime.k_bullet(),
            range.lo,
            range.hi,
            k.k_bullet()
        ));
    }
    Ok(ExclusionOutcome {
        hypothesis_held: true,
        ok: violation.is_none(),
        violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::DEFAULT_N_MAX;
    use crate::params::validate;

    fn class(p: u64, a: u64, s: u64) -> WeightClass {
        WeightClass::new(validate(p, a, s, true).unwrap())
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn l_value_hand_cases() {
        let c = class(11, 2, 0);
        let k14 = Weight::from_u64(1);
        // v_p(w-diff) = 5 >= gap 4
        let l = l_value(&c, &Weight::from_u64(14642), &k14).unwrap();
        assert_eq!(l, Some(BigUint::from(1u32)));
        // v_p(w-diff) = 3 < 4 at k_bullet = 122 (v_p(121) = 2)
        let l = l_value(&c, &Weight::from_u64(122), &k14).unwrap();
        assert_eq!(l, None);
        // self-evaluation takes the maximum
        let l = l_value(&c, &k14, &k14).unwrap();
        assert_eq!(l, Some(BigUint::from(1u32)));
    }

    #[test]
    fn ns_range_hand_cases() {
        let c = class(11, 2, 0);
        let k14 = Weight::from_u64(1);
        let r = ns_range(&c, &Weight::from_u64(14642), &k14)
            .unwrap()
            .unwrap();
        assert_eq!((r.lo, r.hi), (BigInt::from(1), BigInt::from(3)));
        assert!(ns_range(&c, &Weight::from_u64(122), &k14)
            .unwrap()
            .is_none());
        // self-evaluation at k_bullet = 2: half d_iw = 3, L = D = 2
        let k24 = Weight::from_u64(2);
        let r = ns_range(&c, &k24, &k24).unwrap().unwrap();
        assert_eq!((r.lo, r.hi), (BigInt::from(1), BigInt::from(5)));
    }

    #[test]
    fn range_enumeration_and_maximality() {
        let c = class(11, 2, 0);
        let eval = Weight::from_u64(14642);
        let ranges = all_ns_ranges(&c, &eval, 100);
        let found = ranges
            .iter()
            .find(|r| r.k_bullet == BigUint::from(1u32))
            .expect("range from k = 14");
        assert_eq!(
            (found.lo.clone(), found.hi.clone()),
            (BigInt::from(1), BigInt::from(3))
        );
        let maximal = maximal_ns_ranges(&ranges);
        assert!(maximal.iter().any(|r| r.k_bullet == BigUint::from(1u32)));
        // nestedness across the whole list
        for a in &ranges {
            for b in &ranges {
                assert!(a.nested_or_disjoint(b));
            }
        }
    }

    #[test]
    fn no_ranges_without_congruence() {
        // v_p(k_eval - k) = 0 for every k in the window (no candidate is
        // congruent to 10 mod 11 below 10), so nothing qualifies
        let c = class(11, 2, 0);
        let eval = Weight::from_u64(10);
        for kb in 0..=9u64 {
            assert!(ns_range(&c, &eval, &Weight::from_u64(kb))
                .unwrap()
                .is_none());
        }
        assert!(all_ns_ranges(&c, &eval, 9).is_empty());
    }

    #[test]
    fn correspondence_at_deep_congruence() {
        let c = class(11, 2, 0);
        let eval = Weight::from_u64(14642);
        let report = vertex_correspondence(&c, &eval, &rat(8, 1), DEFAULT_N_MAX).unwrap();
        assert!(
            report.ok(),
            "unmatched: {:?} {:?}",
            report.unmatched_segments,
            report.unmatched_ranges
        );
        let pair = report
            .pairs
            .iter()
            .find(|p| (p.lo, p.hi) == (1, 3))
            .expect("range (1,3) from k = 14");
        assert_eq!(pair.k_bullet, BigUint::from(1u32));
        assert_eq!(pair.slope, rat(6, 1));
        assert_eq!(pair.steinberg_slope_ok, Some(true));
    }

    #[test]
    fn correspondence_without_ranges_sees_short_segments() {
        let c = class(11, 2, 0);
        let report =
            vertex_correspondence(&c, &Weight::from_u64(0), &rat(4, 1), DEFAULT_N_MAX).unwrap();
        assert!(report.pairs.is_empty());
        assert!(report.ok());
        // every certified segment has length 1 here
        let cert = report.multiset.certificate.as_ref().unwrap();
        for w in cert.prefix_vertices.windows(2) {
            assert_eq!(w[1].0 - w[0].0, 1);
        }
    }

    #[test]
    fn correspondence_at_self_evaluation() {
        let c = class(11, 2, 0);
        let report =
            vertex_correspondence(&c, &Weight::from_u64(1), &rat(8, 1), DEFAULT_N_MAX).unwrap();
        assert!(report.ok());
        let pair = report
            .pairs
            .iter()
            .find(|p| (p.lo, p.hi) == (1, 3))
            .unwrap();
        assert_eq!(pair.slope, rat(6, 1));
        assert_eq!(pair.steinberg_slope_ok, Some(true));
    }

    #[test]
    fn correspondence_refuses_uncertified() {
        let c = class(11, 2, 0);
        let err = vertex_correspondence(&c, &Weight::from_u64(0), &rat(3, 1), 2).unwrap_err();
        assert_eq!(err, CorrespondenceError::Uncertified);
    }

    #[test]
    fn exclusion_scan_small() {
        let c = class(11, 2, 0);
        let eval = Weight::from_u64(14642);
        let mut held = 0u64;
        for kb in 0..=60u64 {
            for kpb in 0..=60u64 {
                let out = exclusion_check(&c, &eval, &Weight::from_u64(kb), &Weight::from_u64(kpb))
                    .unwrap();
                assert!(out.ok, "violation: {:?}", out.violation);
                if out.hypothesis_held {
                    held += 1;
                }
            }
        }
        assert!(held > 0, "scan should not be entirely vacuous");
    }

    #[test]
    fn exclusion_skips_equal_weights() {
        let c = class(11, 2, 0);
        let w = Weight::from_u64(1);
        let out = exclusion_check(&c, &Weight::from_u64(14642), &w, &w).unwrap();
        assert!(!out.hypothesis_held && out.ok);
    }
}
