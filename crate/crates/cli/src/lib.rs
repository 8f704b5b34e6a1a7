//! Record types for the `ghost` binary's output documents.

pub mod records;
