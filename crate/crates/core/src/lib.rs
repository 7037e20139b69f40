//! Core of the `supertml` row-to-image embedding.
//!
//! A tabular row is turned into a grayscale image by writing each feature
//! value as text into its own cell of a fixed square canvas. This crate holds
//! the allocation-only parts of that pipeline:
//!
//! * [`schema`]: column kind inference and typed samples,
//! * [`format`]: the exact string drawn for a cell value,
//! * [`layout`]: equal-font grid planning and importance-driven
//!   variant-font guillotine planning, plus plan validation,
//! * [`font`] and [`render`]: an embedded bitmap font and deterministic
//!   integer rasterization, including squared-word rendering,
//! * [`importance`]: importance vectors and a mutual-information estimator.
//!
//! File formats, PNG output and the command-line driver live in the
//! `supertml` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod font;
pub mod format;
pub mod importance;
pub mod layout;
pub mod render;
pub mod schema;

pub use font::GlyphFont;
pub use format::{format_value, FormatOptions, Formatted};
pub use importance::{estimate_importance, ImportanceSource, ImportanceVector};
pub use layout::{
    plan_equal_font, plan_variant_font, validate_plan, CanvasSpec, CellSpec, GridShape, LayoutMode,
    LayoutPlan, Violation,
};
pub use render::{render_sample, render_sew, render_text, RasterImage};
pub use schema::{infer_schema, CellValue, Column, ColumnKind, Sample, TabularSchema};
