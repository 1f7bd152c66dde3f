//! File formats and report emission behind the `hyperdeck` binary.

pub mod document;
pub mod graph6;
pub mod report;
