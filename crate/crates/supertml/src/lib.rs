//! File formats, dataset emission and the command line for `supertml`.
//!
//! The rendering model lives in `supertml-core`; this crate reads tables,
//! writes PNG datasets with manifests, and exposes the `supertml` binary.

pub mod cli;
pub mod dataset;
pub mod emit;
pub mod error;
pub mod files;
pub mod pipeline;

pub use emit::{emit_dataset, emit_split, parse_manifest, DatasetManifest, EmitOptions};
pub use error::{Error, Result};
