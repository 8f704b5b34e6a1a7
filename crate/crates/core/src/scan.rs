//! Data-parallel batch computations.
//!
//! The heavy paths are embarrassingly parallel maps over coefficient indices
//! or weight ranges. With the default `parallel` feature they run on rayon;
//! without it they fall back to plain iteration. The `_seq` variants are
//! always compiled so the two code paths can be compared directly (the
//! criterion benches do exactly that), and results are index-ordered either
//! way, so outputs are byte-identical across both.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dims::{d_iw_small, Weight};
use crate::ghost::{gn_valuation_with_tables, profile_with_tables, DeltaProfile, EvalRepr};
use crate::params::WeightClass;
use crate::tables::ClassTables;
use crate::valuation::ExtendedValuation;

/// Cap the global worker pool. Call once, before any parallel scan; later
/// calls fail. A no-op without the `parallel` feature.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) -> Result<(), String> {
    Ok(())
}

pub(crate) fn map_range<T, F>(lo: u64, hi: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (lo..=hi).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (lo..=hi).map(f).collect()
    }
}

pub(crate) fn map_range_seq<T, F>(lo: u64, hi: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (lo..=hi).map(f).collect()
}

/// `v_p(g_n(w_{k_eval}))` for `n in 0..=n_max`.
pub fn coefficient_valuations(
    class: &WeightClass,
    k_eval: &Weight,
    n_max: u64,
) -> Vec<ExtendedValuation> {
    let tables = ClassTables::build(class, class.support_end(n_max));
    let eval = EvalRepr::of(k_eval);
    map_range(0, n_max, |n| {
        gn_valuation_with_tables(class, &tables, n, &eval)
    })
}

/// Sequential variant of [`coefficient_valuations`].
pub fn coefficient_valuations_seq(
    class: &WeightClass,
    k_eval: &Weight,
    n_max: u64,
) -> Vec<ExtendedValuation> {
    let tables = ClassTables::build(class, class.support_end(n_max));
    let eval = EvalRepr::of(k_eval);
    map_range_seq(0, n_max, |n| {
        gn_valuation_with_tables(class, &tables, n, &eval)
    })
}

/// `Δ` profiles for every `k_bullet in 0..=k_bullet_max`, sharing one set of
/// class tables.
pub fn delta_profiles(class: &WeightClass, k_bullet_max: u64) -> Vec<DeltaProfile> {
    let tables = shared_tables(class, k_bullet_max);
    map_range(0, k_bullet_max, |kb| {
        profile_with_tables(class, &tables, kb)
    })
}

/// Sequential variant of [`delta_profiles`].
pub fn delta_profiles_seq(class: &WeightClass, k_bullet_max: u64) -> Vec<DeltaProfile> {
    let tables = shared_tables(class, k_bullet_max);
    map_range_seq(0, k_bullet_max, |kb| {
        profile_with_tables(class, &tables, kb)
    })
}

fn shared_tables(class: &WeightClass, k_bullet_max: u64) -> ClassTables {
    // largest coefficient index any profile in the batch touches
    let n_top = d_iw_small(class.delta(), k_bullet_max);
    ClassTables::build(class, class.support_end(n_top))
}
