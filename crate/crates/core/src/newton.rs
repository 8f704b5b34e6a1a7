//! Newton polygons of ghost series at a weight, with certified truncation.
//!
//! A slope multiset below a bound is only trustworthy if the infinitely many
//! discarded coefficients provably cannot re-enter the hull below that bound.
//! The certificate here rests on the crude but self-contained estimate
//! `v_p(g_n) >= Σ_k m_n(k)` (every linear factor contributes at least 1,
//! because `v_p(w_k - w_{k'}) >= 1` for weights of one class). That sum is
//! checked exactly on an explicit range and bounded below by an explicit
//! quadratic beyond it, so certification always terminates for a fixed
//! slope bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::dims::{d_iw_small, d_ur_small, Weight};
use crate::params::WeightClass;
use crate::scan::coefficient_valuations;
use crate::valuation::ExtendedValuation;

/// Default cap on the truncation index grown by [`certified_slopes`].
pub const DEFAULT_N_MAX: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HullError {
    #[error("empty input")]
    EmptyInput,
    #[error("point indices must be distinct and strictly increasing")]
    UnsortedIndices,
    #[error("the point at index 0 must be present and finite")]
    LeadingPoint,
}

/// Lower convex hull of `(index, valuation)` points: vertices with strictly
/// increasing indices and strictly increasing segment slopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    vertices: Vec<(u64, u64)>,
}

/// One maximal segment of a polygon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start: (u64, u64),
    pub end: (u64, u64),
    pub slope: BigRational,
    pub length: u64,
}

impl NewtonPolygon {
    pub fn vertices(&self) -> &[(u64, u64)] {
        &self.vertices
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.vertices
            .windows(2)
            .map(|w| {
                let (x1, y1) = w[0];
                let (x2, y2) = w[1];
                Segment {
                    start: w[0],
                    end: w[1],
                    slope: BigRational::new(
                        BigInt::from(y2 as i128 - y1 as i128),
                        BigInt::from(x2 - x1),
                    ),
                    length: x2 - x1,
                }
            })
            .collect()
    }
}

/// Monotone-chain lower hull. Infinite points are skipped; collinear interior
/// points are absorbed into their segment.
pub fn lower_hull(points: &[(u64, ExtendedValuation)]) -> Result<NewtonPolygon, HullError> {
    if points.is_empty() {
        return Err(HullError::EmptyInput);
    }
    if points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(HullError::UnsortedIndices);
    }
    if points[0].0 != 0 || !points[0].1.is_finite() {
        return Err(HullError::LeadingPoint);
    }
    let finite: Vec<(u64, u64)> = points
        .iter()
        .filter_map(|&(x, v)| v.finite().map(|y| (x, y)))
        .collect();
    let mut stack: Vec<(u64, u64)> = Vec::new();
    for &(cx, cy) in &finite {
        while stack.len() >= 2 {
            let (ax, ay) = stack[stack.len() - 2];
            let (bx, by) = stack[stack.len() - 1];
            // pop b when slope(a,b) >= slope(b,c)
            let lhs = (by as i128 - ay as i128) * (cx - bx) as i128;
            let rhs = (cy as i128 - by as i128) * (bx - ax) as i128;
            if lhs >= rhs {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push((cx, cy));
    }
    Ok(NewtonPolygon { vertices: stack })
}

/// Newton polygon of the coefficient valuations `v_p(g_n(w_{k_eval}))` for
/// `n in 0..=n_max`.
pub fn ghost_np(class: &WeightClass, k_eval: &Weight, n_max: u64) -> NewtonPolygon {
    assert!(n_max >= 1, "need at least indices 0 and 1");
    let vals = coefficient_valuations(class, k_eval, n_max);
    let points: Vec<(u64, ExtendedValuation)> = vals
        .into_iter()
        .enumerate()
        .map(|(n, v)| (n as u64, v))
        .collect();
    lower_hull(&points).expect("ghost coefficients start with v_p(g_0) = 0")
}

/// `Σ_k m_n(k)`: a lower bound for `v_p(g_n)` at every evaluation weight.
pub fn tail_lower_bound(class: &WeightClass, n: u64) -> u64 {
    let (p, t1, t2, delta) = (class.p(), class.t1(), class.t2(), class.delta());
    let mut total = 0u64;
    for kb in 0..=class.support_end(n) {
        let d_ur = d_ur_small(p, t1, t2, kb);
        if n <= d_ur {
            continue;
        }
        let upper = d_iw_small(delta, kb) - d_ur;
        if n < upper {
            total += (n - d_ur).min(upper - n);
        }
    }
    total
}

/// Certificate that the slope multiset is final: no coefficient beyond the
/// truncation can contribute a slope at or below the bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationCertificate {
    /// Vertex after which hull slopes exceed the bound.
    pub anchor: (u64, u64),
    /// Indices in `(truncation, explicit_to)` were checked exactly against
    /// the anchor line via [`tail_lower_bound`].
    pub explicit_to: u64,
    /// From this index on, the quadratic lower bound on `Σ_k m_n(k)`
    /// dominates the anchor line.
    pub crossover: u64,
    /// Hull vertices of the certified prefix, up to and including the anchor.
    pub prefix_vertices: Vec<(u64, u64)>,
}

/// Slope multiset of a ghost Newton polygon below a bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeMultiset {
    /// `(slope, multiplicity)` sorted by increasing slope.
    pub entries: Vec<(BigRational, u64)>,
    pub bound: BigRational,
    pub certified: bool,
    /// Largest coefficient index computed.
    pub truncation: u64,
    pub certificate: Option<TruncationCertificate>,
}

impl SlopeMultiset {
    /// Total multiplicity; when certified this equals the anchor index.
    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|(_, m)| m).sum()
    }

    pub fn same_multiset(&self, other: &SlopeMultiset) -> bool {
        self.entries == other.entries
    }
}

fn big_rat(n: i128, d: i128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn line_value(anchor: (u64, u64), bound: &BigRational, n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(anchor.1))
        + bound * BigRational::from_integer(BigInt::from(n as i128 - anchor.0 as i128))
}

/// Quadratic lower bound for `Σ_k m_n(k)`, valid for `n >= 4` whenever the
/// linear factor is positive: weights with `k_•` between
/// `(p+1)(n+q+2)/(2p)` and `(p+1)(n-q-2)/2`, `q = ⌊n/4⌋`, all carry
/// multiplicity at least `q`, and there are at least `c1·n + c0` of them.
fn tail_quadratic(p: u64, n: u64) -> BigRational {
    let (c1, c0) = tail_quadratic_coeffs(p);
    let count = c1 * big_rat(n as i128, 1) + c0;
    if count.is_negative() || count.is_zero() {
        return BigRational::zero();
    }
    count * big_rat(n as i128 - 3, 4)
}

fn tail_quadratic_coeffs(p: u64) -> (BigRational, BigRational) {
    let p = p as i128;
    let c1 = big_rat((p + 1) * (3 * p - 5), 8 * p);
    let c0 = big_rat(-(p + 1) * (p + 1), p) - BigRational::one();
    (c1, c0)
}

enum TailOutcome {
    Certified { explicit_to: u64, crossover: u64 },
    FailAt(u64),
}

/// Verify that every index beyond `n_trunc` stays strictly above the line of
/// slope `bound` through `anchor`.
fn check_tail(
    class: &WeightClass,
    anchor: (u64, u64),
    bound: &BigRational,
    n_trunc: u64,
) -> TailOutcome {
    let p = class.p();
    let (c1, c0) = tail_quadratic_coeffs(p);
    // Q(n) = (c1 n + c0)(n - 3)/4 = alpha n^2 + beta n + gamma
    let alpha = &c1 / big_rat(4, 1);
    let beta = (&c0 - big_rat(3, 1) * &c1) / big_rat(4, 1);
    // Q(n) - (bound n + const) grows beyond its vertex (bound - beta)/(2 alpha)
    let vertex = (bound - &beta) / (big_rat(2, 1) * &alpha);
    let mut crossover = vertex
        .ceil()
        .to_integer()
        .to_i64()
        .map(|v| v.max(4) as u64)
        .unwrap_or(4)
        .max(4);
    loop {
        let q = tail_quadratic(p, crossover);
        if q > line_value(anchor, bound, crossover) && !q.is_zero() {
            break;
        }
        crossover += 1;
    }
    for n in (n_trunc + 1)..crossover {
        let t = tail_lower_bound(class, n);
        if BigRational::from_integer(BigInt::from(t)) <= line_value(anchor, bound, n) {
            return TailOutcome::FailAt(n);
        }
    }
    TailOutcome::Certified {
        explicit_to: crossover.max(n_trunc + 1),
        crossover,
    }
}

/// Grow the truncation until the slope multiset `<= slope_bound` is certified
/// final, or `n_max` is exceeded.
///
/// The uncertified outcome is explicit: `certified` is false and the entries
/// report the best known prefix.
pub fn certified_slopes(
    class: &WeightClass,
    k_eval: &Weight,
    slope_bound: &BigRational,
    n_max: u64,
) -> SlopeMultiset {
    assert!(!slope_bound.is_negative(), "slope bound must be >= 0");
    let mut n_trunc = 16u64.min(n_max).max(2);
    loop {
        let vals = coefficient_valuations(class, k_eval, n_trunc);
        let points: Vec<(u64, ExtendedValuation)> = vals
            .into_iter()
            .enumerate()
            .map(|(n, v)| (n as u64, v))
            .collect();
        let hull = lower_hull(&points).expect("g_0 = 1 anchors the hull");
        let segments = hull.segments();
        let cut = segments.iter().position(|s| &s.slope > slope_bound);
        let mut grow_to = n_trunc.saturating_mul(2);
        if let Some(cut) = cut {
            let anchor = hull.vertices()[cut];
            match check_tail(class, anchor, slope_bound, n_trunc) {
                TailOutcome::Certified {
                    explicit_to,
                    crossover,
                } => {
                    let entries = collect_entries(&segments[..cut]);
                    return SlopeMultiset {
                        entries,
                        bound: slope_bound.clone(),
                        certified: true,
                        truncation: n_trunc,
                        certificate: Some(TruncationCertificate {
                            anchor,
                            explicit_to,
                            crossover,
                            prefix_vertices: hull.vertices()[..=cut].to_vec(),
                        }),
                    };
                }
                TailOutcome::FailAt(n) => grow_to = grow_to.max(n),
            }
        }
        if n_trunc >= n_max {
            let below: Vec<Segment> = segments
                .into_iter()
                .take_while(|s| &s.slope <= slope_bound)
                .collect();
            return SlopeMultiset {
                entries: collect_entries(&below),
                bound: slope_bound.clone(),
                certified: false,
                truncation: n_trunc,
                certificate: None,
            };
        }
        n_trunc = grow_to.min(n_max);
    }
}

fn collect_entries(segments: &[Segment]) -> Vec<(BigRational, u64)> {
    let mut entries: Vec<(BigRational, u64)> = Vec::new();
    for seg in segments {
        match entries.last_mut() {
            Some((slope, mult)) if *slope == seg.slope => *mult += seg.length,
            _ => entries.push((seg.slope.clone(), seg.length)),
        }
    }
    entries
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate;

    fn class(p: u64, a: u64, s: u64) -> WeightClass {
        WeightClass::new(validate(p, a, s, true).unwrap())
    }

    fn fin(v: u64) -> ExtendedValuation {
        ExtendedValuation::Finite(v)
    }

    fn slopes_of(np: &NewtonPolygon) -> Vec<(BigRational, u64)> {
        collect_entries(&np.segments())
    }

    #[test]
    fn hull_keeps_convex_points() {
        let pts = [
            (0, fin(0)),
            (1, fin(0)),
            (2, fin(3)),
            (3, fin(13)),
            (4, fin(26)),
        ];
        let np = lower_hull(&pts).unwrap();
        assert_eq!(np.vertices(), &[(0, 0), (1, 0), (2, 3), (3, 13), (4, 26)]);
        let s = slopes_of(&np);
        let expect: Vec<(BigRational, u64)> = [(0, 1), (3, 1), (10, 1), (13, 1)]
            .map(|(v, m)| (big_rat(v, 1), m))
            .to_vec();
        assert_eq!(s, expect);
    }

    #[test]
    fn hull_drops_point_above_chord() {
        let pts = [(0, fin(0)), (1, fin(0)), (2, fin(7)), (3, fin(12))];
        let np = lower_hull(&pts).unwrap();
        assert_eq!(np.vertices(), &[(0, 0), (1, 0), (3, 12)]);
        assert_eq!(slopes_of(&np), vec![(big_rat(0, 1), 1), (big_rat(6, 1), 2)]);
    }

    #[test]
    fn hull_skips_infinite_points() {
        let pts = [(0, fin(0)), (1, ExtendedValuation::Infinite), (2, fin(4))];
        let np = lower_hull(&pts).unwrap();
        assert_eq!(np.vertices(), &[(0, 0), (2, 4)]);
        assert_eq!(slopes_of(&np), vec![(big_rat(2, 1), 2)]);
    }

    #[test]
    fn hull_absorbs_collinear_interior_points() {
        let pts = [(0, fin(0)), (1, fin(2)), (2, fin(4)), (3, fin(9))];
        let np = lower_hull(&pts).unwrap();
        assert_eq!(np.vertices(), &[(0, 0), (2, 4), (3, 9)]);
    }

    #[test]
    fn hull_input_errors() {
        assert_eq!(lower_hull(&[]), Err(HullError::EmptyInput));
        assert_eq!(
            lower_hull(&[(0, fin(0)), (0, fin(1))]),
            Err(HullError::UnsortedIndices)
        );
        assert_eq!(
            lower_hull(&[(0, ExtendedValuation::Infinite), (1, fin(1))]),
            Err(HullError::LeadingPoint)
        );
        assert_eq!(lower_hull(&[(1, fin(0))]), Err(HullError::LeadingPoint));
    }

    #[test]
    fn ghost_np_hand_values() {
        let c = class(11, 2, 0);
        // coefficients at w_4: 0, 0, 3, 13, 26
        let np = ghost_np(&c, &Weight::from_u64(0), 4);
        assert_eq!(np.vertices(), &[(0, 0), (1, 0), (2, 3), (3, 13), (4, 26)]);
        // at k_bullet = 14642 the n=2 coefficient (valuation 7) sits above
        // the chord from (1,0) to (3,12)
        let np = ghost_np(&c, &Weight::from_u64(14642), 3);
        assert_eq!(np.vertices(), &[(0, 0), (1, 0), (3, 12)]);
        // with d_ur >= 1 everywhere, g_1 = 1 and N=1 sees only slope 0
        let np = ghost_np(&c, &Weight::from_u64(5), 1);
        assert_eq!(slopes_of(&np), vec![(big_rat(0, 1), 1)]);
    }

    #[test]
    fn tail_lower_bound_hand_values() {
        let c = class(11, 2, 0);
        assert_eq!(tail_lower_bound(&c, 2), 3);
        assert_eq!(tail_lower_bound(&c, 0), 0);
        assert_eq!(tail_lower_bound(&c, 3), 12);
    }

    #[test]
    fn certified_slopes_bound_three() {
        let c = class(11, 2, 0);
        let ms = certified_slopes(&c, &Weight::from_u64(0), &big_rat(3, 1), DEFAULT_N_MAX);
        assert!(ms.certified);
        assert_eq!(ms.entries, vec![(big_rat(0, 1), 1), (big_rat(3, 1), 1)]);
        let cert = ms.certificate.unwrap();
        assert_eq!(cert.anchor, (2, 3));
    }

    #[test]
    fn certified_slopes_bound_zero() {
        let c = class(11, 2, 0);
        for kb in [1u64, 14642] {
            let ms = certified_slopes(
                &c,
                &Weight::from_u64(kb),
                &BigRational::zero(),
                DEFAULT_N_MAX,
            );
            assert!(ms.certified, "k_bullet = {kb}");
            assert_eq!(ms.entries, vec![(big_rat(0, 1), 1)], "k_bullet = {kb}");
        }
    }

    #[test]
    fn sum_rule() {
        let c = class(11, 2, 9);
        for kb in [0u64, 3, 7] {
            for b in 0..5i128 {
                let ms = certified_slopes(&c, &Weight::from_u64(kb), &big_rat(b, 1), DEFAULT_N_MAX);
                assert!(ms.certified);
                let anchor = ms.certificate.as_ref().unwrap().anchor;
                assert_eq!(ms.total_multiplicity(), anchor.0, "kb={kb} bound={b}");
            }
        }
    }

    #[test]
    fn refinement_is_monotone() {
        // growing the truncation never disturbs the certified prefix
        let c = class(11, 2, 0);
        let w = Weight::from_u64(1);
        let ms = certified_slopes(&c, &w, &big_rat(2, 1), DEFAULT_N_MAX);
        assert!(ms.certified);
        let anchor = ms.certificate.as_ref().unwrap().anchor;
        let np_small = ghost_np(&c, &w, ms.truncation);
        let np_large = ghost_np(&c, &w, ms.truncation * 4);
        let small: Vec<_> = np_small
            .vertices()
            .iter()
            .filter(|v| v.0 <= anchor.0)
            .collect();
        let large: Vec<_> = np_large
            .vertices()
            .iter()
            .filter(|v| v.0 <= anchor.0)
            .collect();
        assert_eq!(small, large);
    }

    #[test]
    fn uncertified_is_explicit() {
        let c = class(11, 2, 0);
        // n_max too small to anchor bound 3 (needs index beyond 3)
        let ms = certified_slopes(&c, &Weight::from_u64(0), &big_rat(3, 1), 2);
        assert!(!ms.certified);
        assert!(ms.certificate.is_none());
    }
}
