//! Valuations of ghost coefficients at arithmetic weights, and the centered
//! profile `Δ'_{k,ℓ}` with its lower convex hull `Δ_{k,ℓ}`.
//!
//! The coefficient `g_n(w)` is a finite product of factors `(w - w_k)` with
//! exponents `m_n(k)`; evaluated at an arithmetic weight `w_{k'}` its
//! valuation is the exact sum `Σ_k m_n(k) (v_p(k - k') + 1)`, infinite
//! precisely when the evaluation weight itself carries a factor. The hatted
//! variant removes the factors at one designated weight, which is what makes
//! self-evaluation finite.
//!
//! Profiles tilt the hatted valuations around the center index `½ d^Iw`:
//! `Δ'_{k,ℓ} = v_p(g_{½d^Iw+ℓ, k̂}(w_k)) - ((k-2)/2) ℓ` for `|ℓ| <= ½ d^new`.
//! All values are exact rationals with denominator 1 or 2; the hull is taken
//! by a monotone chain over the integer points `(ℓ, 2Δ'_{k,ℓ})`, so no
//! floating point is involved anywhere.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::dims::{d_iw_small, d_ur_small, Weight};
use crate::params::WeightClass;
use crate::tables::ClassTables;
use crate::valuation::{vp_big, vp_u64, ExtendedValuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GhostError {
    #[error("ell = {ell} out of range; |ell| must be at most {radius}")]
    EllOutOfRange { ell: i64, radius: u64 },
    #[error("weight k_bullet = {k_bullet} too large for profile computation")]
    WeightTooLarge { k_bullet: BigUint },
}

pub(crate) enum EvalRepr<'a> {
    Small(u64),
    Big(&'a BigUint),
}

impl<'a> EvalRepr<'a> {
    pub(crate) fn of(w: &'a Weight) -> Self {
        match w.k_bullet().to_u64() {
            Some(v) => EvalRepr::Small(v),
            None => EvalRepr::Big(w.k_bullet()),
        }
    }

    #[inline]
    fn matches(&self, k_bullet: u64) -> bool {
        matches!(self, EvalRepr::Small(v) if *v == k_bullet)
    }

    #[inline]
    fn vp_diff(&self, p: u64, tables: Option<&ClassTables>, k_bullet: u64) -> u64 {
        match self {
            EvalRepr::Small(v) => match tables {
                Some(t) => t.vp_diff(*v, k_bullet),
                None => vp_u64(p, v.abs_diff(k_bullet)),
            },
            EvalRepr::Big(b) => vp_big(p, &(*b - BigUint::from(k_bullet))),
        }
    }
}

/// Valuation sum over the support window, with `hat` weights excluded.
/// `hat = None` gives the plain coefficient.
fn valuation_sum(
    class: &WeightClass,
    tables: Option<&ClassTables>,
    n: u64,
    eval: &EvalRepr<'_>,
    hat: Option<u64>,
) -> ExtendedValuation {
    let p = class.p();
    let (t1, t2, delta) = (class.t1(), class.t2(), class.delta());
    let end = class.support_end(n);
    let mut total: u64 = 0;
    for kb in 0..=end {
        if hat == Some(kb) {
            continue;
        }
        let m = match tables {
            Some(t) => t.multiplicity(n, kb),
            None => {
                let d_ur = d_ur_small(p, t1, t2, kb);
                if n <= d_ur {
                    continue;
                }
                let upper = d_iw_small(delta, kb) - d_ur;
                if n >= upper {
                    continue;
                }
                (n - d_ur).min(upper - n)
            }
        };
        if m == 0 {
            continue;
        }
        if eval.matches(kb) {
            return ExtendedValuation::Infinite;
        }
        total += m * (eval.vp_diff(p, tables, kb) + 1);
    }
    ExtendedValuation::Finite(total)
}

/// `v_p(g_n(w_{k_eval}))`: infinite exactly when `m_n(k_eval) > 0`.
pub fn gn_valuation(class: &WeightClass, n: u64, k_eval: &Weight) -> ExtendedValuation {
    valuation_sum(class, None, n, &EvalRepr::of(k_eval), None)
}

/// `v_p(g_{n, k̂}(w_{k_eval}))` with the factors at `k_hat` removed.
///
/// Always finite when `k_eval = k_hat`; for other evaluation weights it can
/// still be infinite if the evaluation weight carries its own factor.
pub fn gn_hat_valuation(
    class: &WeightClass,
    n: u64,
    k_eval: &Weight,
    k_hat: &Weight,
) -> ExtendedValuation {
    // A hat weight beyond the support window removes nothing.
    let hat = k_hat.k_bullet().to_u64();
    valuation_sum(class, None, n, &EvalRepr::of(k_eval), hat)
}

pub(crate) fn gn_valuation_with_tables(
    class: &WeightClass,
    tables: &ClassTables,
    n: u64,
    eval: &EvalRepr<'_>,
) -> ExtendedValuation {
    valuation_sum(class, Some(tables), n, eval, None)
}

/// The profile `Δ'` together with its lower convex hull `Δ`.
///
/// `raw[ℓ + D]` holds `Δ'_{k,ℓ}` and `hull[ℓ + D]` holds `Δ_{k,ℓ}` for
/// `ℓ in [-D, D]` with `D = ½ d^new`; both are empty when `d^new = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaProfile {
    k_bullet: u64,
    half_iw: u64,
    radius: u64,
    raw: Vec<BigRational>,
    hull: Vec<BigRational>,
    hull_vertices: Vec<i64>,
}

impl DeltaProfile {
    pub fn k_bullet(&self) -> u64 {
        self.k_bullet
    }

    pub fn weight(&self) -> Weight {
        Weight::from_u64(self.k_bullet)
    }

    /// `½ d^Iw`, the center index of the profile.
    pub fn half_iw(&self) -> u64 {
        self.half_iw
    }

    /// `D = ½ d^new`.
    pub fn radius(&self) -> u64 {
        self.radius
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn raw_at(&self, ell: i64) -> Option<&BigRational> {
        self.index(ell).map(|i| &self.raw[i])
    }

    pub fn hull_at(&self, ell: i64) -> Option<&BigRational> {
        self.index(ell).map(|i| &self.hull[i])
    }

    /// ℓ values of the strict hull vertices, in increasing order.
    pub fn hull_vertices(&self) -> &[i64] {
        &self.hull_vertices
    }

    /// `Δ_{k,L} - Δ_{k,L-1}` for `1 <= L <= D`.
    pub fn gap(&self, l: u64) -> Option<BigRational> {
        if l == 0 || l > self.radius {
            return None;
        }
        let hi = self.hull_at(l as i64)?;
        let lo = self.hull_at(l as i64 - 1)?;
        Some(hi - lo)
    }

    fn index(&self, ell: i64) -> Option<usize> {
        if self.raw.is_empty() || ell.unsigned_abs() > self.radius {
            None
        } else {
            Some((ell + self.radius as i64) as usize)
        }
    }
}

fn weight_small(w: &Weight) -> Result<u64, GhostError> {
    w.k_bullet()
        .to_u64()
        .ok_or_else(|| GhostError::WeightTooLarge {
            k_bullet: w.k_bullet().clone(),
        })
}

/// `Δ'_{k,ℓ}` as an exact rational (denominator 1 or 2).
pub fn delta_prime(class: &WeightClass, k: &Weight, ell: i64) -> Result<BigRational, GhostError> {
    let kb = weight_small(k)?;
    let d_ur = d_ur_small(class.p(), class.t1(), class.t2(), kb);
    let d_iw = d_iw_small(class.delta(), kb);
    debug_assert!(
        d_iw.is_multiple_of(2),
        "d_iw must be even for the center index to exist"
    );
    let radius = d_iw / 2 - d_ur;
    if ell.unsigned_abs() > radius {
        return Err(GhostError::EllOutOfRange { ell, radius });
    }
    let n = (d_iw / 2) as i64 + ell;
    debug_assert!(n >= 0);
    let v = gn_hat_valuation(class, n as u64, k, k)
        .finite()
        .expect("hatted self-evaluation is finite");
    let k_val = class.k_of_small(kb) as i128;
    let numer = 2 * v as i128 - (k_val - 2) * ell as i128;
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(2)))
}

/// Lower hull of integer points by monotone chain; returns indices of the
/// strict vertices (collinear interior points absorbed).
fn lower_hull_indices(points: &[(i64, i128)]) -> Vec<usize> {
    let mut stack: Vec<usize> = Vec::new();
    for (i, &(cx, cy)) in points.iter().enumerate() {
        while stack.len() >= 2 {
            let (ax, ay) = points[stack[stack.len() - 2]];
            let (bx, by) = points[stack[stack.len() - 1]];
            // pop b when slope(a,b) >= slope(b,c)
            if (by - ay) * ((cx - bx) as i128) >= (cy - by) * ((bx - ax) as i128) {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(i);
    }
    stack
}

pub(crate) fn profile_with_tables(
    class: &WeightClass,
    tables: &ClassTables,
    k_bullet: u64,
) -> DeltaProfile {
    let d_ur = tables.d_ur(k_bullet);
    let d_iw = tables.d_iw(k_bullet);
    debug_assert!(d_iw.is_multiple_of(2));
    let half_iw = d_iw / 2;
    assert!(
        half_iw >= d_ur,
        "d_new negative at k_bullet={k_bullet}; dimension formulas inconsistent"
    );
    let radius = half_iw - d_ur;
    if radius == 0 {
        // d_new = 0: empty profile by convention
        return DeltaProfile {
            k_bullet,
            half_iw,
            radius: 0,
            raw: Vec::new(),
            hull: Vec::new(),
            hull_vertices: Vec::new(),
        };
    }
    let k_val = class.k_of_small(k_bullet) as i128;
    let len = (2 * radius + 1) as usize;
    let mut doubled: Vec<(i64, i128)> = Vec::with_capacity(len);
    for off in 0..len as i64 {
        let ell = off - radius as i64;
        let n = (half_iw as i64 + ell) as u64;
        let end = class.support_end(n);
        let mut v: u64 = 0;
        for kb in 0..=end {
            if kb == k_bullet {
                continue;
            }
            let m = tables.multiplicity(n, kb);
            if m == 0 {
                continue;
            }
            v += m * (tables.vp_diff(k_bullet, kb) + 1);
        }
        doubled.push((ell, 2 * v as i128 - (k_val - 2) * ell as i128));
    }
    let vertex_idx = lower_hull_indices(&doubled);
    let hull_vertices: Vec<i64> = vertex_idx.iter().map(|&i| doubled[i].0).collect();
    let raw: Vec<BigRational> = doubled
        .iter()
        .map(|&(_, y)| BigRational::new(BigInt::from(y), BigInt::from(2)))
        .collect();
    let mut hull: Vec<BigRational> = Vec::with_capacity(len);
    let mut seg = 0usize;
    for off in 0..len as i64 {
        let ell = off - radius as i64;
        while seg + 1 < vertex_idx.len() && doubled[vertex_idx[seg + 1]].0 < ell {
            seg += 1;
        }
        let (ax, ay) = doubled[vertex_idx[seg]];
        let (bx, by) = doubled[vertex_idx[seg + 1]];
        // linear interpolation of the doubled values, then halve
        let numer = ay * ((bx - ell) as i128) + by * ((ell - ax) as i128);
        let denom = 2 * (bx - ax) as i128;
        hull.push(BigRational::new(BigInt::from(numer), BigInt::from(denom)));
    }
    DeltaProfile {
        k_bullet,
        half_iw,
        radius,
        raw,
        hull,
        hull_vertices,
    }
}

/// Full `Δ'`/`Δ` profile of a weight.
pub fn delta_profile(class: &WeightClass, k: &Weight) -> Result<DeltaProfile, GhostError> {
    let kb = weight_small(k)?;
    let d_iw = d_iw_small(class.delta(), kb);
    let tables = ClassTables::build(class, class.support_end(d_iw));
    Ok(profile_with_tables(class, &tables, kb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate;

    fn class(p: u64, a: u64, s: u64) -> WeightClass {
        WeightClass::new(validate(p, a, s, true).unwrap())
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn gn_valuation_hand_values() {
        let c = class(11, 2, 0);
        // n=2 at w_4 (k_bullet = 0): factors at k_bullet 1,2,3 each valuation 1
        assert_eq!(
            gn_valuation(&c, 2, &Weight::from_u64(0)),
            ExtendedValuation::Finite(3)
        );
        // g_0 is the empty product
        assert_eq!(
            gn_valuation(&c, 0, &Weight::from_u64(12345)),
            ExtendedValuation::Finite(0)
        );
        // n=2 at k_bullet = 14642 = 11^4 + 1: v_p(14641)+1 + 1 + 1
        assert_eq!(
            gn_valuation(&c, 2, &Weight::from_u64(14642)),
            ExtendedValuation::Finite(7)
        );
    }

    #[test]
    fn gn_valuation_infinite_on_own_factor() {
        let c = class(11, 2, 0);
        // m_2(k) = 1 at k_bullet = 1
        assert_eq!(
            gn_valuation(&c, 2, &Weight::from_u64(1)),
            ExtendedValuation::Infinite
        );
    }

    #[test]
    fn gn_hat_hand_values() {
        let c = class(11, 2, 0);
        let w14 = Weight::from_u64(1);
        // n=2, hat=eval=w_14: remaining factors at k_bullet 2 and 3
        assert_eq!(
            gn_hat_valuation(&c, 2, &w14, &w14),
            ExtendedValuation::Finite(2)
        );
        // n=3, hat=eval=w_14: k_bullet 2..=11 with m = 2,2,1x8
        assert_eq!(
            gn_hat_valuation(&c, 3, &w14, &w14),
            ExtendedValuation::Finite(12)
        );
        // removing a factor-free weight changes nothing
        let w_eval = Weight::from_u64(0);
        let w_hat = Weight::from_u64(40);
        assert_eq!(c.multiplicity(2, &w_hat), 0);
        assert_eq!(
            gn_hat_valuation(&c, 2, &w_eval, &w_hat),
            gn_valuation(&c, 2, &w_eval)
        );
    }

    #[test]
    fn delta_prime_hand_values() {
        let c = class(11, 2, 0);
        let w14 = Weight::from_u64(1);
        assert_eq!(delta_prime(&c, &w14, -1).unwrap(), rat(6, 1));
        assert_eq!(delta_prime(&c, &w14, 0).unwrap(), rat(2, 1));
        assert_eq!(delta_prime(&c, &w14, 1).unwrap(), rat(6, 1));
        assert!(matches!(
            delta_prime(&c, &w14, 2),
            Err(GhostError::EllOutOfRange { ell: 2, radius: 1 })
        ));
    }

    #[test]
    fn delta_prime_symmetry_at_k_bullet_4() {
        let c = class(11, 2, 0);
        let w = Weight::from_u64(4);
        let d = c.dims(&w);
        let radius = (num_traits::ToPrimitive::to_i64(&d.d_new).unwrap()) / 2;
        for ell in 0..=radius {
            assert_eq!(
                delta_prime(&c, &w, ell).unwrap(),
                delta_prime(&c, &w, -ell).unwrap(),
                "ell = {ell}"
            );
        }
    }

    #[test]
    fn profile_at_w14() {
        let c = class(11, 2, 0);
        let prof = delta_profile(&c, &Weight::from_u64(1)).unwrap();
        assert_eq!(prof.radius(), 1);
        assert_eq!(prof.raw_at(-1).unwrap(), &rat(6, 1));
        assert_eq!(prof.raw_at(0).unwrap(), &rat(2, 1));
        assert_eq!(prof.raw_at(1).unwrap(), &rat(6, 1));
        // hull equals raw here; gap is 4
        for ell in -1..=1 {
            assert_eq!(prof.hull_at(ell), prof.raw_at(ell));
        }
        assert_eq!(prof.gap(1).unwrap(), rat(4, 1));
        assert_eq!(prof.hull_vertices(), &[-1, 0, 1]);
    }

    #[test]
    fn profile_empty_when_d_new_zero() {
        let c = class(11, 2, 0);
        let prof = delta_profile(&c, &Weight::from_u64(0)).unwrap();
        assert!(prof.is_empty());
        assert_eq!(prof.radius(), 0);
        assert!(prof.gap(1).is_none());
    }

    #[test]
    fn profile_gap_at_least_three_halves_at_k_bullet_12() {
        let c = class(11, 2, 0);
        let prof = delta_profile(&c, &Weight::from_u64(12)).unwrap();
        assert!(prof.gap(1).unwrap() >= rat(3, 2));
    }

    #[test]
    fn profile_matches_delta_prime_and_is_convex() {
        for (p, a, s) in [(11u64, 2, 0), (11, 2, 9), (13, 4, 3)] {
            let c = class(p, a, s);
            for kb in 0..=25u64 {
                let w = Weight::from_u64(kb);
                let prof = delta_profile(&c, &w).unwrap();
                if prof.is_empty() {
                    continue;
                }
                let r = prof.radius() as i64;
                for ell in -r..=r {
                    assert_eq!(
                        prof.raw_at(ell).unwrap(),
                        &delta_prime(&c, &w, ell).unwrap(),
                        "raw mismatch at kb={kb} ell={ell} ({p},{a},{s})"
                    );
                    assert!(prof.hull_at(ell).unwrap() <= prof.raw_at(ell).unwrap());
                }
                // hull pinned at the endpoints
                assert_eq!(prof.hull_at(-r), prof.raw_at(-r));
                assert_eq!(prof.hull_at(r), prof.raw_at(r));
                // convexity: second differences of hull values are >= 0
                for ell in (-r + 1)..r {
                    let lo = prof.hull_at(ell - 1).unwrap();
                    let mid = prof.hull_at(ell).unwrap();
                    let hi = prof.hull_at(ell + 1).unwrap();
                    assert!(
                        lo + hi >= mid.clone() + mid.clone(),
                        "convexity at kb={kb} ell={ell}"
                    );
                }
            }
        }
    }
}
