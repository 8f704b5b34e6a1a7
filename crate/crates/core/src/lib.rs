//! Exact arithmetic for ghost-series slope data.
//!
//! Everything here is built from a validated parameter triple `(p, a, s)`:
//! the derived combinatorial constants, closed-form dimension sequences,
//! p-adic valuations of ghost coefficients at arithmetic weights, Newton
//! polygons with certified truncation, near-Steinberg ranges, and a
//! verification harness that scans the slope local-constancy statements
//! and the supporting inequalities over explicit parameter grids.
//!
//! All slope and profile values are exact rationals; weights are
//! arbitrary-precision integers. No floating point enters any hull or
//! valuation path (floats appear only in the logarithmic envelope check,
//! which is labeled approximate).

pub mod dims;
pub mod ghost;
pub mod newton;
pub mod params;
pub mod scan;
pub mod steinberg;
mod tables;
pub mod valuation;
pub mod verify;

pub use dims::{DimTriple, Weight};
pub use ghost::DeltaProfile;
pub use newton::{NewtonPolygon, SlopeMultiset};
pub use params::{DerivedConstants, GhostParams, WeightClass};
pub use steinberg::NsRange;
pub use valuation::ExtendedValuation;
