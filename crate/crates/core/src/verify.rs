//! The verification harness: slope local-constancy checks and scans of every
//! supporting identity and inequality over explicit parameter grids.
//!
//! Each check reports pass/fail/vacuous with case counts, so grid summaries
//! expose how much of a scan actually exercised a hypothesis. A failure
//! always carries a reproducible input. Failures are data, not panics.

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::dims::{d_iw_small, d_ur_small, Weight};
use crate::ghost::DeltaProfile;
use crate::newton::{certified_slopes, SlopeMultiset, DEFAULT_N_MAX};
use crate::params::{residue_mod_pm1, GhostParams, WeightClass};
use crate::scan::delta_profiles;
use crate::steinberg::{
    all_ns_ranges, l_value_from_profile, maximal_ns_ranges, vertex_correspondence, NsRange,
};
use crate::valuation::{sum_vp, vp_weight_diff, ExtendedValuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The hypothesis never held on the scanned grid.
    Vacuous,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// Instances where the hypothesis held and the conclusion was checked.
    pub cases: u64,
    /// Instances skipped because the hypothesis failed.
    pub vacuous_cases: u64,
    pub counterexample: Option<String>,
    pub millis: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub p: u64,
    pub a: u64,
    pub s: u64,
    pub k_bullet_max: u64,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .collect()
    }
}

/// Accumulates one check's outcome while a scan runs.
struct Tally {
    cases: u64,
    vacuous: u64,
    counterexample: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            cases: 0,
            vacuous: 0,
            counterexample: None,
        }
    }

    fn case(&mut self, ok: bool, cx: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(cx());
        }
    }

    fn skip(&mut self) {
        self.vacuous += 1;
    }

    fn failed(&self) -> bool {
        self.counterexample.is_some()
    }

    fn into_result(self, name: &'static str, start: Instant) -> CheckResult {
        let status = if self.counterexample.is_some() {
            CheckStatus::Fail
        } else if self.cases == 0 {
            CheckStatus::Vacuous
        } else {
            CheckStatus::Pass
        };
        CheckResult {
            name: name.to_string(),
            status,
            cases: self.cases,
            vacuous_cases: self.vacuous,
            counterexample: self.counterexample,
            millis: start.elapsed().as_millis(),
        }
    }
}

fn rat(n: i128, d: i128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_str(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Default parameter grid: both sample primes, the full legal `a` range, and
/// three `s` values probing both rows of the constant table.
pub fn default_grid() -> Vec<GhostParams> {
    let mut out = Vec::new();
    for p in [11u64, 13] {
        for a in 2..=p - 5 {
            for s in [0, p / 2, p - 2] {
                out.push(crate::params::validate(p, a, s, true).expect("grid params valid"));
            }
        }
    }
    out
}

/// Three evaluation weights per cell: one inside the scan window and two
/// deep-congruence weights hitting different residues mod `p`.
pub fn default_eval_weights(class: &WeightClass) -> Vec<Weight> {
    let p4 = BigUint::from(class.p()).pow(4);
    vec![
        Weight::from_u64(1),
        Weight::new(&p4 + 1u32),
        Weight::new((&p4 + 1u32) * 2u32),
    ]
}

struct SuiteCtx<'a> {
    class: &'a WeightClass,
    k_max: u64,
    profiles: Vec<DeltaProfile>,
    evals: Vec<Weight>,
}

/// Run the full invariant suite for one parameter cell.
pub fn lemma_suite(class: &WeightClass, k_bullet_max: u64) -> VerificationReport {
    let profiles = delta_profiles(class, k_bullet_max);
    let ctx = SuiteCtx {
        class,
        k_max: k_bullet_max,
        profiles,
        evals: default_eval_weights(class),
    };
    let checks = vec![
        timed("t1_t2_identity", || check_t1_t2(&ctx)),
        timed("dur_sandwich", || check_sandwich(&ctx)),
        timed("dims_monotonicity", || check_monotonicity(&ctx)),
        timed("parity_corollary", || check_parity(&ctx)),
        timed("delta_symmetry", || check_symmetry(&ctx)),
        timed("gap_three_halves", || check_gap_three_halves(&ctx)),
        timed("gap_bound_lemma", || check_gap_bound(&ctx)),
        timed("key_minus_four", || check_key_minus_four(&ctx)),
        timed("hull_deviation_log_sq", || check_hull_deviation(&ctx)),
        timed("gamma_log_bound", || check_gamma_log(&ctx)),
        timed("l_implies_vp", || check_l_implies_vp(&ctx)),
        timed("nestedness", || check_nestedness(&ctx)),
        timed("exclusion", || check_exclusion(&ctx)),
        timed("vertex_correspondence", || check_correspondence(&ctx)),
        timed("tool_lemma_bounds", || check_tool_lemma(&ctx)),
        timed("four_part_lemma", || check_four_part(&ctx)),
    ];
    VerificationReport {
        p: class.p(),
        a: class.a(),
        s: class.s(),
        k_bullet_max,
        checks,
    }
}

/// Run [`lemma_suite`] over many cells, merged deterministically by
/// `(p, a, s)`.
pub fn lemma_suite_grid(cells: &[GhostParams], k_bullet_max: u64) -> Vec<VerificationReport> {
    let mut sorted: Vec<GhostParams> = cells.to_vec();
    sorted.sort_by_key(|c| (c.p, c.a, c.s));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        sorted
            .par_iter()
            .map(|params| lemma_suite(&WeightClass::new(*params), k_bullet_max))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        sorted
            .iter()
            .map(|params| lemma_suite(&WeightClass::new(*params), k_bullet_max))
            .collect()
    }
}

fn timed(name: &'static str, f: impl FnOnce() -> Tally) -> CheckResult {
    let start = Instant::now();
    f().into_result(name, start)
}

fn cell_tag(class: &WeightClass) -> String {
    format!("(p,a,s)=({},{},{})", class.p(), class.a(), class.s())
}

fn check_t1_t2(ctx: &SuiteCtx) -> Tally {
    let class = ctx.class;
    let mut t = Tally::new();
    let (p, t1, t2) = (class.p(), class.t1(), class.t2());
    let rhs =
        class.s() + residue_mod_pm1(p, (class.a() + class.s()) as i64) + 2 + 2 * class.delta();
    t.case(t1 + t2 == rhs, || {
        format!("t1+t2 = {} != {} at {}", t1 + t2, rhs, cell_tag(class))
    });
    let gap = t2 as i64 - t1 as i64;
    t.case(gap >= 4 && gap <= p as i64 - 3, || {
        format!("t2-t1 = {gap} outside [4, p-3] at {}", cell_tag(class))
    });
    t
}

fn check_sandwich(ctx: &SuiteCtx) -> Tally {
    let class = ctx.class;
    let mut t = Tally::new();
    let p = class.p() as i128;
    for kb in 0..=ctx.k_max {
        let d = d_ur_small(class.p(), class.t1(), class.t2(), kb) as i128;
        let ok = d * (p + 1) >= 2 * kb as i128 - 2 * (p + 1)
            && d * (p + 1) <= 2 * kb as i128 + 2 * (p + 1);
        t.case(ok, || {
            format!("sandwich fails at k_bullet={kb} {}", cell_tag(class))
        });
        if t.failed() {
            break;
        }
    }
    t
}

fn check_monotonicity(ctx: &SuiteCtx) -> Tally {
    let class = ctx.class;
    let mut t = Tally::new();
    let dims: Vec<(u64, u64)> = (0..=ctx.k_max)
        .map(|kb| {
            let d_ur = d_ur_small(class.p(), class.t1(), class.t2(), kb);
            (d_ur, d_iw_small(class.delta(), kb) - d_ur)
        })
        .collect();
    'outer: for i in 0..dims.len() {
        for j in i + 1..dims.len() {
            let ok = dims[i].0 <= dims[j].0
                && dims[i].1 <= dims[j].1
                && (j < i + 2 || dims[i].1 < dims[j].1);
            t.case(ok, || {
                format!("monotonicity fails at k_bullet={i},{j} {}", cell_tag(class))
            });
            if t.failed() {
                break 'outer;
            }
        }
    }
    t
}

fn check_parity(ctx: &SuiteCtx) -> Tally {
    let class = ctx.class;
    let mut t = Tally::new();
    let (p, t1, t2) = (class.p(), class.t1(), class.t2());
    for kb in 0..=ctx.k_max {
        let a_res = ((kb as i64 - t1 as i64).rem_euclid(p as i64 + 1)) as u64 + t1;
        let d_ur = d_ur_small(p, t1, t2, kb);
        let ok = if d_ur % 2 == 1 {
            a_res < t2
        } else {
            a_res >= t2
        };
        t.case(ok, || {
            format!(
                "parity corollary fails at k_bullet={kb} (A={a_res}, d_ur={d_ur}) {}",
                cell_tag(class)
            )
        });
        if t.failed() {
            break;
        }
    }
    t
}

fn check_symmetry(ctx: &SuiteCtx) -> Tally {
    let mut t = Tally::new();
    for prof in &ctx.profiles {
        if prof.is_empty() {
            t.skip();
            continue;
        }
        let d = prof.radius() as i64;
        for ell in 1..=d {
            t.case(prof.raw_at(ell) == prof.raw_at(-ell), || {
                format!(
                    "delta-prime asymmetry at k_bullet={} ell={ell} {}",
                    prof.k_bullet(),
                    cell_tag(ctx.class)
                )
            });
            if t.failed() {
                return t;
            }
        }
    }
    t
}

fn check_gap_three_halves(ctx: &SuiteCtx) -> Tally {
    let mut t = Tally::new();
    let threshold = rat(3, 2);
    for prof in &ctx.profiles {
        if prof.radius() == 0 {
            t.skip();
            continue;
        }
        let gap = prof.gap(1).expect("radius >= 1");
        t.case(gap >= threshold, || {
            format!(
                "gap {} < 3/2 at k_bullet={} {}",
                rat_str(&gap),
                prof.k_bullet(),
                cell_tag(ctx.class)
            )
        });
        if t.failed() {
            break;
        }
    }
    t
}

fn check_gap_bound(ctx: &SuiteCtx) -> Tally {
    let class = ctx.class;
    let mut t = Tally::new();
    let p = class.p() as i128;
    for kb in 0..=ctx.k_max {
        let n = d_ur_small(class.p(), class.t1(), class.t2(), kb);
        let d_iw = d_iw_small(class.delta(), kb);
        let big_d = (d_iw / 2 - n) as i128;
        let theta = class.theta(n as i64) as i128;
        let k = class.k_of_small(kb) as i128;
        let c = if n % 2 == 1 { 2 } else { 1 };
        // (p+1)[(k-2) - (p-1)(D-1) - theta] >= 2(p-1) k_bullet - 2(p+1) c
        let lhs = (p + 1) * ((k - 2) - (p - 1) * (big_d - 1) - theta);
        let rhs = 2 * (p - 1) * kb as i128 - 2 * (p + 1) * c;
        t.case(lhs >= rhs, || {
            format!(
                "gap-bound lemma fails at k_bullet={kb} (n={n}, D={big_d}) {}",
                cell_tag(class)
            )
        });
        if t.failed() {
            break;
        }
    }
    t
}

fn check_key_minus_four(ctx: &SuiteCtx) -> Tally {
    let mut t = Tally::new();
    for prof in &ctx.profiles {
        if prof.radius() == 0 {
            t.skip();
            continue;
        }
        let gap = prof.gap(prof.radius()).expect("radius >= 1");
        let k = ctx.class.k_of_small(prof.k_bullet()) as i128;
        // (k-2)/2 >= gap - 4
        let lhs = rat(k - 2, 2) + rat(4, 1);
        t.case(lhs >= gap, || {
            format!(
                "top-gap bound fails at k_bullet={}: gap {} > (k-2)/2 + 4 {}",
                prof.k_bullet(),
                rat_str(&gap),
                cell_tag(ctx.class)
            )
        });
        if t.failed() {
            break;
        }
    }
    t
}

fn check_hull_deviation(ctx: &SuiteCtx) -> Tally {
    let mut t = Tally::new();
    let p = ctx.class.p() as f64;
    for prof in &ctx.profiles {
        let d = prof.radius();
        if d == 0 {
            t.skip();
            continue;
        }
        let ell = d as i64 - 1;
        let dev = prof.raw_at(ell).unwrap() - prof.hull_at(ell).unwrap();
        debug_assert!(!dev.is_negative());
        // approximate comparison: the bound is logarithmic, the deviation exact
        let dev_f = dev.to_f64().unwrap_or(f64::INFINITY);
        let log_d = (d as f64).ln() / p.ln();
        let ok = dev_f <= 3.0 * log_d * log_d + 1e-9;
        t.case(ok, || {
            format!(
                "hull deviation {dev_f} exceeds 3 log_p(D)^2 at k_bullet={} (D={d}) {}",
                prof.k_bullet(),
                cell_tag(ctx.class)
            )
        });
        if t.failed() {
            break;
        }
    }
    t
}

fn check_gamma_log(ctx: &SuiteCtx) -> Tally {
    let class = ctx.class;
    let mut t = Tally::new();
    let p = class.p();
    for kb in 1..=ctx.k_max {
        let n = d_ur_small(p, class.t1(), class.t2(), kb);
        let d_iw = d_iw_small(class.delta(), kb);
        let big_d = d_iw / 2 - n;
        if big_d == 0 {
            t.skip();
            continue;
        }
        let eta = class
            .eta(n as i64, &BigUint::from(kb))
            .to_i64()
            .expect("eta small at scan scale");
        let half_w = p.div_ceil(2) as i64 * (big_d as i64 - 1);
        let lo = eta - half_w;
        let hi = eta + class.theta(n as i64) as i64 + half_w;
        if !(lo > 0 && hi as i128 <= (p as i128) * kb as i128) {
            t.skip();
            continue;
        }
        let gamma = crate::valuation::max_vp_interval(p, lo, hi).expect("positive interval");
        // gamma <= log_p(p k_bullet) <=> p^gamma <= p * k_bullet
        let ok = gamma == 0 || (p as u128).pow((gamma - 1) as u32) <= kb as u128;
        t.case(ok, || {
            format!(
                "gamma={gamma} exceeds log_p(p k_bullet) at k_bullet={kb} {}",
                cell_tag(class)
            )
        });
        if t.failed() {
            break;
        }
    }
    t
}

fn check_l_implies_vp(ctx: &SuiteCtx) -> Tally {
    let class = ctx.class;
    let mut t = Tally::new();
    let p = class.p();
    for eval in &ctx.evals {
        let eval_res = (eval.k_bullet() % p).to_u64().expect("residue fits");
        for prof in &ctx.profiles {
            match l_value_from_profile(class, eval, prof) {
                None => t.skip(),
                Some(_) => {
                    t.case(prof.k_bullet() % p == eval_res, || {
                        format!(
                            "L >= 1 with v_p(k_eval - k) = 0 at k_bullet={} eval={} {}",
                            prof.k_bullet(),
                            eval.k_bullet(),
                            cell_tag(class)
                        )
                    });
                }
            }
            if t.failed() {
                return t;
            }
        }
    }
    t
}

fn ranges_unpruned(ctx: &SuiteCtx, eval: &Weight) -> Vec<NsRange> {
    ctx.profiles
        .iter()
        .filter_map(|prof| {
            l_value_from_profile(ctx.class, eval, prof).map(|l| {
                let half_iw = prof.half_iw();
                NsRange {
                    k_bullet: BigUint::from(prof.k_bullet()),
                    l: BigUint::from(l),
                    lo: BigInt::from(half_iw as i128 - l as i128),
                    hi: BigInt::from(half_iw + l),
                }
            })
        })
        .collect()
}

fn check_nestedness(ctx: &SuiteCtx) -> Tally {
    let mut t = Tally::new();
    for eval in &ctx.evals {
        let ranges = ranges_unpruned(ctx, eval);
        if ranges.is_empty() {
            t.skip();
            continue;
        }
        for i in 0..ranges.len() {
            for j in i + 1..ranges.len() {
                t.case(ranges[i].nested_or_disjoint(&ranges[j]), || {
                    format!(
                        "ranges ({},{}) and ({},{}) cross at eval={} {}",
                        ranges[i].lo,
                        ranges[i].hi,
                        ranges[j].lo,
                        ranges[j].hi,
                        eval.k_bullet(),
                        cell_tag(ctx.class)
                    )
                });
                if t.failed() {
                    return t;
                }
            }
        }
    }
    t
}

fn check_exclusion(ctx: &SuiteCtx) -> Tally {
    let class = ctx.class;
    let mut t = Tally::new();
    let p = class.p();
    let dims: Vec<(u64, u64, u64)> = (0..=ctx.k_max)
        .map(|kb| {
            let d_ur = d_ur_small(p, class.t1(), class.t2(), kb);
            let d_iw = d_iw_small(class.delta(), kb);
            (d_ur, d_iw / 2, d_iw - d_ur)
        })
        .collect();
    for eval in &ctx.evals {
        for prof in &ctx.profiles {
            let kb = prof.k_bullet();
            let Some(l) = l_value_from_profile(class, eval, prof) else {
                t.skip();
                continue;
            };
            let gap = prof.gap(l).expect("L within radius");
            let half_iw = prof.half_iw() as i128;
            let (lo, hi) = (half_iw - l as i128, half_iw + l as i128);
            for kpb in 0..=ctx.k_max {
                if kpb == kb {
                    continue;
                }
                let v = crate::valuation::vp_u64(p, kb.abs_diff(kpb)) + 1;
                if BigRational::from_integer(BigInt::from(v)) < gap {
                    t.skip();
                    continue;
                }
                let (d_ur_p, half_p, comp_p) = dims[kpb as usize];
                let ok = !(lo <= half_p as i128 && (half_p as i128) <= hi)
                    && !(lo < d_ur_p as i128 && (d_ur_p as i128) < hi)
                    && !(lo < comp_p as i128 && (comp_p as i128) < hi);
                t.case(ok, || {
                    format!(
                        "exclusion fails: k_bullet={kb}, k'_bullet={kpb}, eval={} range ({lo},{hi}) {}",
                        eval.k_bullet(),
                        cell_tag(class)
                    )
                });
                if t.failed() {
                    return t;
                }
            }
        }
    }
    t
}

fn check_correspondence(ctx: &SuiteCtx) -> Tally {
    let mut t = Tally::new();
    let bound = rat(8, 1);
    for eval in &ctx.evals {
        match vertex_correspondence(ctx.class, eval, &bound, DEFAULT_N_MAX) {
            Err(e) => t.case(false, || {
                format!(
                    "correspondence refused at eval={}: {e} {}",
                    eval.k_bullet(),
                    cell_tag(ctx.class)
                )
            }),
            Ok(report) => {
                t.case(report.ok(), || {
                    format!(
                        "correspondence mismatch at eval={}: segments {:?}, ranges {:?} {}",
                        eval.k_bullet(),
                        report.unmatched_segments,
                        report
                            .unmatched_ranges
                            .iter()
                            .map(|(lo, hi, kb)| format!("({lo},{hi}) from {kb}"))
                            .collect::<Vec<_>>(),
                        cell_tag(ctx.class)
                    )
                });
            }
        }
        if t.failed() {
            break;
        }
    }
    t
}

struct XorShift64(u64);

impl XorShift64 {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
}

fn check_tool_lemma(ctx: &SuiteCtx) -> Tally {
    let mut t = Tally::new();
    let mut rng = XorShift64(0x9E37_79B9_7F4A_7C15);
    let p = ctx.class.p();
    for _ in 0..10_000 {
        let n1 = (rng.next() % 5_000) as i64;
        let len = 1 + (rng.next() % 800) as i64;
        let (n1, n2) = if rng.next().is_multiple_of(2) {
            (n1, n1 + len)
        } else {
            (-(n1 + len) - 1, -n1 - 1)
        };
        let report = sum_vp(p, n1, n2).expect("range avoids zero");
        t.case(report.lower_bound_holds && report.upper_bound_holds, || {
            format!("tool-lemma bounds fail on ({n1},{n2}] with p={p}")
        });
        if t.failed() {
            break;
        }
    }
    t
}

fn check_four_part(ctx: &SuiteCtx) -> Tally {
    let class = ctx.class;
    let mut t = Tally::new();
    for eval in &ctx.evals {
        // weights satisfying the top-gap hypothesis
        let mut hyp: Vec<&DeltaProfile> = Vec::new();
        for prof in &ctx.profiles {
            if prof.radius() == 0 {
                t.skip();
                continue;
            }
            let gap = prof.gap(prof.radius()).expect("radius >= 1");
            let holds = match vp_weight_diff(class, eval, &prof.weight()) {
                ExtendedValuation::Infinite => true,
                ExtendedValuation::Finite(v) => BigRational::from_integer(BigInt::from(v)) >= gap,
            };
            if holds {
                hyp.push(prof);
            } else {
                t.skip();
            }
        }
        if hyp.is_empty() {
            continue;
        }
        let bound = hyp
            .iter()
            .map(|prof| rat(class.k_of_small(prof.k_bullet()) as i128 - 2, 2))
            .max()
            .expect("nonempty");
        let ms = certified_slopes(class, eval, &bound, DEFAULT_N_MAX);
        if !ms.certified {
            t.case(false, || {
                format!(
                    "four-part scan uncertified at eval={} {}",
                    eval.k_bullet(),
                    cell_tag(class)
                )
            });
            break;
        }
        let cert = ms.certificate.as_ref().expect("certified");
        let anchor = cert.anchor.0;
        let all_ranges = all_ns_ranges(class, eval, class.support_end(anchor).max(ctx.k_max));
        let maximal = maximal_ns_ranges(&all_ranges);
        for prof in hyp {
            let kb = prof.k_bullet();
            let d_ur = prof.half_iw() - prof.radius();
            let comp = prof.half_iw() + prof.radius();
            let cx = |what: &str| {
                format!(
                    "four-part {what} fails at k_bullet={kb} eval={} {}",
                    eval.k_bullet(),
                    cell_tag(class)
                )
            };
            // (1) the range is the full interval (d_ur, d_iw - d_ur)
            let l = l_value_from_profile(class, eval, prof);
            t.case(l == Some(prof.radius()), || cx("L = D"));
            // (3) it is maximal
            let is_max = maximal.iter().any(|r| {
                r.k_bullet == BigUint::from(kb)
                    && r.lo == BigInt::from(d_ur)
                    && r.hi == BigInt::from(comp)
            });
            t.case(is_max, || cx("maximality"));
            // (4) the polygon has a segment (d_ur, comp) of slope (k-2)/2
            let segment = cert
                .prefix_vertices
                .windows(2)
                .find(|w| w[0].0 == d_ur && w[1].0 == comp);
            match segment {
                None => t.case(false, || cx("segment endpoints")),
                Some(w) => {
                    let slope = rat(w[1].1 as i128 - w[0].1 as i128, comp as i128 - d_ur as i128);
                    let expect = rat(class.k_of_small(kb) as i128 - 2, 2);
                    t.case(slope == expect, || cx("segment slope"));
                }
            }
            if t.failed() {
                return t;
            }
        }
    }
    t
}

/// The logarithmic envelope `y(x) = ((p-1)/(p+1)) x - 5 - log_p(x)
/// - ⌊log_p(x+1)⌋ - 3 (log_p(x+1))²` evaluated in floating point, with its
/// minima over `x in {1,2}` and `x >= 3`.
///
/// This is the only approximate computation in the crate; the envelope is a
/// display bound, not an input to any exact check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FigureEnvelope {
    pub at_one: f64,
    pub at_two: f64,
    pub min_first_two: f64,
    pub min_from_three: f64,
    pub argmin_from_three: u64,
}

pub fn figure_constants(params: &GhostParams) -> FigureEnvelope {
    let p = params.p;
    let pf = p as f64;
    let log_p = |x: u64| (x as f64).ln() / pf.ln();
    let floor_log_p = |x: u64| {
        // exact integer floor of log_p(x), immune to float edges at powers
        let mut e = 0u64;
        let mut q = p;
        while q <= x {
            e += 1;
            match q.checked_mul(p) {
                Some(next) => q = next,
                None => break,
            }
        }
        e as f64
    };
    let y = |x: u64| {
        (pf - 1.0) / (pf + 1.0) * x as f64
            - 5.0
            - log_p(x)
            - floor_log_p(x + 1)
            - 3.0 * log_p(x + 1) * log_p(x + 1)
    };
    let at_one = y(1);
    let at_two = y(2);
    // the linear term dominates all logarithmic terms well before 10^3,
    // so the scan window is conservative
    let (argmin, min_from_three) = (3..=1000u64)
        .map(|x| (x, y(x)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
        .expect("nonempty scan");
    FigureEnvelope {
        at_one,
        at_two,
        min_first_two: at_one.min(at_two),
        min_from_three,
        argmin_from_three: argmin,
    }
}

/// Result of the small-weight refinement check: the hull touches the raw
/// profile one step below the top, and `(k-2)/2 - (Δ_{k,D} - Δ_{k,D-1})` is
/// a half-integer at least -4.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfIntReport {
    pub k_bullet: u64,
    pub vacuous: bool,
    pub hull_equals_raw_below_top: bool,
    pub half_integral: bool,
    pub at_least_minus_four: bool,
    /// `(k-2)/2 - (Δ_{k,D} - Δ_{k,D-1})` as `num/den`.
    pub value: Option<String>,
}

impl HalfIntReport {
    pub fn ok(&self) -> bool {
        self.vacuous
            || (self.hull_equals_raw_below_top && self.half_integral && self.at_least_minus_four)
    }
}

pub fn halfint_refinement_check(class: &WeightClass, k_bullet: u64) -> HalfIntReport {
    let prof =
        crate::ghost::delta_profile(class, &Weight::from_u64(k_bullet)).expect("small weight");
    let d = prof.radius();
    if d == 0 {
        return HalfIntReport {
            k_bullet,
            vacuous: true,
            hull_equals_raw_below_top: false,
            half_integral: false,
            at_least_minus_four: false,
            value: None,
        };
    }
    let ell = d as i64 - 1;
    let hull_equals_raw = prof.hull_at(ell) == prof.raw_at(ell);
    let gap = prof.gap(d).expect("radius >= 1");
    let k = class.k_of_small(k_bullet) as i128;
    let value = rat(k - 2, 2) - gap;
    let half_integral = (value.clone() * rat(2, 1)).is_integer();
    let at_least = value >= rat(-4, 1);
    HalfIntReport {
        k_bullet,
        vacuous: false,
        hull_equals_raw_below_top: hull_equals_raw,
        half_integral,
        at_least_minus_four: at_least,
        value: Some(rat_str(&value)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlopeEntry {
    pub slope: String,
    #[serde(rename = "mult")]
    pub multiplicity: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultisetSummary {
    pub k_bullet: String,
    pub bound: String,
    pub certified: bool,
    pub truncation: u64,
    pub entries: Vec<SlopeEntry>,
}

pub fn summarize_multiset(w: &Weight, ms: &SlopeMultiset) -> MultisetSummary {
    MultisetSummary {
        k_bullet: w.k_bullet().to_string(),
        bound: rat_str(&ms.bound),
        certified: ms.certified,
        truncation: ms.truncation,
        entries: ms
            .entries
            .iter()
            .map(|(slope, m)| SlopeEntry {
                slope: rat_str(slope),
                multiplicity: *m,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqualityReport {
    /// Entry-by-entry equality of the two multisets.
    pub equal: bool,
    /// Both sides certified; equality is only meaningful when set.
    pub certified: bool,
    pub left: MultisetSummary,
    pub right: MultisetSummary,
}

/// Compare certified slope multisets at a common bound.
pub fn slope_multisets_equal(
    class: &WeightClass,
    k1: &Weight,
    k2: &Weight,
    bound: &BigRational,
    n_max: u64,
) -> EqualityReport {
    let left = certified_slopes(class, k1, bound, n_max);
    let right = certified_slopes(class, k2, bound, n_max);
    EqualityReport {
        equal: left.same_multiset(&right),
        certified: left.certified && right.certified,
        left: summarize_multiset(k1, &left),
        right: summarize_multiset(k2, &right),
    }
}

/// The congruence family `S = {k : k ≡ k₁ mod (p-1)p^m}` inside the class,
/// carried by `k_• ≡ k₁_• mod p^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightFamily {
    pub base: Weight,
    pub m: u32,
    /// `p^m`, the step between consecutive members in `k_•` terms.
    pub step: BigUint,
    pub k0_min: Weight,
    pub k0_max: Weight,
}

impl WeightFamily {
    pub fn new(class: &WeightClass, base: Weight, m: u32) -> Self {
        let step = BigUint::from(class.p()).pow(m);
        let r = base.k_bullet() % &step;
        WeightFamily {
            base,
            m,
            k0_min: Weight::new(r.clone()),
            k0_max: Weight::new(r + &step),
            step,
        }
    }

    pub fn contains(&self, w: &Weight) -> bool {
        w.k_bullet() % &self.step == self.k0_min.k_bullet() % &self.step
    }

    /// `t`-th member: `k₀^min + t(p-1)p^m` in weight terms.
    pub fn member(&self, t: u64) -> Weight {
        Weight::new(self.k0_min.k_bullet() + &self.step * BigUint::from(t))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstancyPair {
    pub t: u64,
    #[serde(flatten)]
    pub report: EqualityReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstancyReport {
    pub m: u32,
    pub bound: String,
    pub base_k_bullet: String,
    pub pairs: Vec<ConstancyPair>,
    pub all_equal: bool,
    pub all_certified: bool,
    /// The automorphic statement needs `k₁ > m-3` on top of `k₁ >= 2`;
    /// recorded as metadata, not enforced.
    pub base_weight_exceeds_m_minus_3: bool,
}

/// Local constancy at bound `m-4`: compare `k₁` against
/// `k₂ = k₁ + t(p-1)p^m` for `t = 1..=pair_count`.
pub fn check_local_constancy(
    class: &WeightClass,
    m: u32,
    k1: &Weight,
    pair_count: u64,
    n_max: u64,
) -> ConstancyReport {
    assert!(m >= 4, "local constancy needs m >= 4");
    let bound = BigRational::from_integer(BigInt::from(m - 4));
    let step = BigUint::from(class.p()).pow(m);
    let mut pairs = Vec::new();
    for t in 1..=pair_count {
        let k2 = Weight::new(k1.k_bullet() + &step * BigUint::from(t));
        let report = slope_multisets_equal(class, k1, &k2, &bound, n_max);
        pairs.push(ConstancyPair { t, report });
    }
    let all_equal = pairs.iter().all(|p| p.report.equal);
    let all_certified = pairs.iter().all(|p| p.report.certified);
    let k1_value = BigInt::from(class.k_of(k1));
    ConstancyReport {
        m,
        bound: rat_str(&bound),
        base_k_bullet: k1.k_bullet().to_string(),
        pairs,
        all_equal,
        all_certified,
        base_weight_exceeds_m_minus_3: k1_value > BigInt::from(m as i64 - 3),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MainPropReport {
    pub n0: String,
    pub bound: String,
    pub hypothesis_holds: bool,
    pub status: CheckStatus,
    pub detail: String,
}

impl MainPropReport {
    pub fn ok(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

/// Slope bound for the segment starting at `n₀ = d^ur_{k₀}`: when every
/// smaller family member `k` has `d^Iw_k - d^ur_k <= n₀`, any polygon segment
/// of the polygon at `w_{k̃}` with left endpoint `n₀` has slope at least
/// `min(m-4, (k₀-2)/2)`.
pub fn check_main_proposition(
    class: &WeightClass,
    tilde_k: &Weight,
    k0: &Weight,
    m: u32,
    n_max: u64,
) -> MainPropReport {
    assert!(m >= 4);
    let family = WeightFamily::new(class, tilde_k.clone(), m);
    assert!(family.contains(k0), "k0 must lie in the family of tilde_k");
    let n0 = class.d_ur(k0);
    let bound_m = BigRational::from_integer(BigInt::from(m - 4));
    let k0_value = BigInt::from(class.k_of(k0));
    let bound_k0 = BigRational::new(k0_value - 2, BigInt::from(2));
    let bound = bound_m.min(bound_k0);
    // Monotonicity makes the largest member below k0 the binding case.
    let hypothesis_holds = if k0.k_bullet() < family.k0_max.k_bullet() {
        true // k0 is the least member; nothing lies below it
    } else {
        let prev = Weight::new(k0.k_bullet() - &family.step);
        let d = class.dims(&prev);
        d.d_iw - d.d_ur <= n0
    };
    if !hypothesis_holds {
        return MainPropReport {
            n0: n0.to_string(),
            bound: rat_str(&bound),
            hypothesis_holds: false,
            status: CheckStatus::Vacuous,
            detail: "hypothesis on k0 fails; nothing to check".into(),
        };
    }
    let ms = certified_slopes(class, tilde_k, &bound, n_max);
    if !ms.certified {
        return MainPropReport {
            n0: n0.to_string(),
            bound: rat_str(&bound),
            hypothesis_holds: true,
            status: CheckStatus::Fail,
            detail: format!("certification failed below index {}", ms.truncation),
        };
    }
    let cert = ms.certificate.as_ref().expect("certified");
    let anchor = cert.anchor.0;
    let (status, detail) = if n0 > BigUint::from(anchor) {
        (
            CheckStatus::Pass,
            format!("n0 beyond anchor {anchor}; slopes there already exceed the bound"),
        )
    } else {
        let n0_small = n0.to_u64().expect("n0 <= anchor");
        if n0_small == anchor {
            (
                CheckStatus::Pass,
                format!(
                    "n0 is the anchor vertex; following slopes exceed {}",
                    rat_str(&bound)
                ),
            )
        } else {
            match cert.prefix_vertices.iter().position(|v| v.0 == n0_small) {
                None => (CheckStatus::Vacuous, "no segment starts at n0".into()),
                Some(i) => {
                    let (x1, y1) = cert.prefix_vertices[i];
                    let (x2, y2) = cert.prefix_vertices[i + 1];
                    let slope = rat(y2 as i128 - y1 as i128, x2 as i128 - x1 as i128);
                    if slope >= bound {
                        (
                            CheckStatus::Pass,
                            format!("segment ({x1},{x2}) has slope {}", rat_str(&slope)),
                        )
                    } else {
                        (
                            CheckStatus::Fail,
                            format!(
                                "segment ({x1},{x2}) has slope {} below {}",
                                rat_str(&slope),
                                rat_str(&bound)
                            ),
                        )
                    }
                }
            }
        }
    };
    MainPropReport {
        n0: n0.to_string(),
        bound: rat_str(&bound),
        hypothesis_holds: true,
        status,
        detail,
    }
}

/// Diagnostic only: look for congruent pairs whose multisets at bound `m-3`
/// already differ. Finding none is not a failure; findings document how far
/// the `m-4` bound is from sharp.
pub fn sharpness_probe(
    class: &WeightClass,
    m: u32,
    k1: &Weight,
    pair_count: u64,
    n_max: u64,
) -> Vec<String> {
    assert!(m >= 4);
    let bound = BigRational::from_integer(BigInt::from(m - 3));
    let step = BigUint::from(class.p()).pow(m);
    let mut findings = Vec::new();
    for t in 1..=pair_count {
        let k2 = Weight::new(k1.k_bullet() + &step * BigUint::from(t));
        let rep = slope_multisets_equal(class, k1, &k2, &bound, n_max);
        if rep.certified && !rep.equal {
            findings.push(format!(
                "multisets at bound m-3 differ for k_bullet {} vs {}",
                k1.k_bullet(),
                k2.k_bullet()
            ));
        }
    }
    findings
}
