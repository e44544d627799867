//! Static auditing of personal-data flows in a small Android-style IR.
//!
//! The pipeline is: parse ([`ir`]) → label sources ([`registry`]) → build
//! call and dependence graphs ([`graph`]) → slice ([`slicer`]) → propagate
//! taint with pseudonymization status ([`taint`]) → map onto the data
//! protection vocabulary ([`dpv`]) → score and emit the audit report
//! ([`report`]). [`cli`] wires the stages together.

pub mod ir;
pub mod graph;
pub mod registry;
pub mod digest;
pub mod slicer;
pub mod taint;
pub mod dpv;
pub mod report;
pub mod pipeline;
pub mod cli;
