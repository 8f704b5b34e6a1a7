//! Output document records. Every payload printed by the binary
//! deserializes back into the type that emitted it.
//!
//! Conventions: arbitrary-precision integers are decimal strings, rationals
//! are `num/den` strings, valuations are decimal strings or `inf`. Payloads
//! are deterministic for fixed flags; wall-clock timing lives only in
//! [`Metadata`].

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub version: String,
    pub p: u64,
    pub a: u64,
    pub s: u64,
    pub strict: bool,
    pub outside_theorem_range: bool,
    pub threads: Option<usize>,
    pub timing_ms: u128,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Document {
    pub metadata: Metadata,
    pub payload: Value,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ParamsPayload {
    pub p: u64,
    pub a: u64,
    pub s: u64,
    pub outside_theorem_range: bool,
    pub k_eps: u64,
    pub delta: u64,
    pub t1: u64,
    pub t2: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DimRow {
    pub k_bullet: String,
    pub d_ur: String,
    pub d_iw: String,
    pub d_new: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DimsPayload {
    pub rows: Vec<DimRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CoeffRow {
    pub n: u64,
    pub valuation: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GhostPayload {
    pub k_bullet: String,
    pub rows: Vec<CoeffRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentRow {
    pub from: u64,
    pub to: u64,
    pub slope: String,
    pub length: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NpPayload {
    pub k_bullet: String,
    pub n_max: u64,
    pub vertices: Vec<CoeffRow>,
    pub segments: Vec<SegmentRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SlopeEntryRow {
    pub slope: String,
    pub mult: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CertificatePayload {
    pub anchor_index: u64,
    pub anchor_valuation: u64,
    pub explicit_to: u64,
    pub crossover: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SlopesPayload {
    pub k_bullet: String,
    pub bound: String,
    pub certified: bool,
    pub truncation: u64,
    pub entries: Vec<SlopeEntryRow>,
    pub certificate: Option<CertificatePayload>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DeltaRow {
    pub ell: i64,
    pub raw: String,
    pub hull: String,
    pub vertex: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DeltaPayload {
    pub k_bullet: String,
    pub radius: u64,
    pub half_iw: u64,
    pub rows: Vec<DeltaRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NsRow {
    pub k_bullet: String,
    pub l: String,
    pub lo: String,
    pub hi: String,
    pub maximal: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NsPayload {
    pub k_eval_bullet: String,
    pub window: u64,
    pub ranges: Vec<NsRow>,
}
