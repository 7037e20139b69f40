//! Rasterization of formatted feature text into plan cells.

use alloc::vec::Vec;

use thiserror::Error;

use crate::font::GlyphFont;
use crate::format::{format_value, FormatOptions};
use crate::layout::{sew_arity, CellSpec, LayoutPlan};
use crate::schema::{Sample, TabularSchema};

/// Single-channel 8-bit image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, fill: u8) -> Self {
        RasterImage {
            width,
            height,
            pixels: alloc::vec![fill; width as usize * height as usize],
        }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<u8>) -> Option<Self> {
        (pixels.len() == width as usize * height as usize).then_some(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    fn set(&mut self, x: u32, y: u32, value: u8) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = value;
    }

    fn contains(&self, cell: &CellSpec) -> bool {
        cell.right() <= u64::from(self.width) && cell.bottom() <= u64::from(self.height)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("{chars} characters at size {font_size} overflow a {width}x{height} cell")]
    Overflow {
        chars: usize,
        font_size: u32,
        width: u32,
        height: u32,
    },
    #[error("cell lies outside the canvas")]
    OutsideCanvas,
    #[error("squared-word cell is {width}x{height}, not square")]
    NotSquare { width: u32, height: u32 },
    #[error("squared word is empty")]
    EmptyWord,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("sample has {found} features, plan has {expected}")]
    Arity { expected: usize, found: usize },
    #[error("plan has no cell for feature {0}")]
    MissingCell(usize),
    #[error("feature {feature}: {source}")]
    Render {
        feature: usize,
        #[source]
        source: RenderError,
    },
}

/// Draws `text` left to right from the cell's top-left corner at the cell's
/// font size, wrapping onto further lines when one line is too narrow.
/// Pixels outside the cell are never written.
pub fn render_text(
    canvas: &mut RasterImage,
    cell: &CellSpec,
    text: &str,
    font: &GlyphFont,
    ink: u8,
) -> Result<(), RenderError> {
    if !canvas.contains(cell) {
        return Err(RenderError::OutsideCanvas);
    }
    let chars = text.chars().count();
    if chars == 0 {
        return Ok(());
    }
    let size = cell.font_size;
    let advance = font.advance(size);
    let line_height = font.line_height(size);
    let overflow = RenderError::Overflow {
        chars,
        font_size: size,
        width: cell.width,
        height: cell.height,
    };
    let per_line = cell.width.checked_div(advance).unwrap_or(0) as usize;
    if per_line == 0 {
        return Err(overflow);
    }
    let lines = chars.div_ceil(per_line) as u64;
    if lines * u64::from(line_height) > u64::from(cell.height) {
        return Err(overflow);
    }
    for (k, c) in text.chars().enumerate() {
        let ox = cell.x + (k % per_line) as u32 * advance;
        let oy = cell.y + (k / per_line) as u32 * line_height;
        for y in 0..line_height {
            for x in 0..advance {
                if font.ink(c, x, y, advance, line_height) {
                    canvas.set(ox + x, oy + y, ink);
                }
            }
        }
    }
    Ok(())
}

/// Geometry of a rendered squared word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SewGrid {
    /// Characters per row and column.
    pub arity: u32,
    /// Side of each character's square slot in pixels.
    pub slot: u32,
}

/// Draws `word` as a squared word: its characters fill a `g x g` grid
/// (`g = ceil(sqrt(len))`) row-major, each stretched to a square slot of
/// `side / g` pixels, so every word covers the same square whatever its
/// length.
pub fn render_sew(
    canvas: &mut RasterImage,
    cell: &CellSpec,
    word: &str,
    font: &GlyphFont,
    ink: u8,
) -> Result<SewGrid, RenderError> {
    if cell.width != cell.height {
        return Err(RenderError::NotSquare {
            width: cell.width,
            height: cell.height,
        });
    }
    if !canvas.contains(cell) {
        return Err(RenderError::OutsideCanvas);
    }
    let chars = word.chars().count();
    if chars == 0 {
        return Err(RenderError::EmptyWord);
    }
    let arity = sew_arity(chars);
    let slot = cell.width / arity;
    if slot == 0 {
        return Err(RenderError::Overflow {
            chars,
            font_size: cell.font_size,
            width: cell.width,
            height: cell.height,
        });
    }
    for (k, c) in word.chars().enumerate() {
        let k = k as u32;
        let ox = cell.x + (k % arity) * slot;
        let oy = cell.y + (k / arity) * slot;
        for y in 0..slot {
            for x in 0..slot {
                if font.ink(c, x, y, slot, slot) {
                    canvas.set(ox + x, oy + y, ink);
                }
            }
        }
    }
    Ok(SewGrid { arity, slot })
}

/// Renders one sample onto a fresh canvas following `plan`.
pub fn render_sample(
    sample: &Sample,
    plan: &LayoutPlan,
    schema: &TabularSchema,
    opts: &FormatOptions,
    font: &GlyphFont,
) -> Result<RasterImage, SampleError> {
    let expected = plan.n_features();
    if sample.values.len() != expected || schema.n_features() != expected {
        return Err(SampleError::Arity {
            expected,
            found: sample.values.len(),
        });
    }
    let side = plan.canvas.side;
    let ink = plan.canvas.foreground;
    let mut canvas = RasterImage::new(side, side, plan.canvas.background);
    for (feature, (value, column)) in sample.values.iter().zip(schema.features()).enumerate() {
        let cell = match plan.cells.get(feature) {
            Some(c) if c.feature_index == feature => c,
            _ => plan
                .cell(feature)
                .ok_or(SampleError::MissingCell(feature))?,
        };
        let text = format_value(value, column, opts).text;
        let drawn = if cell.sew {
            if text.is_empty() {
                Ok(())
            } else {
                render_sew(&mut canvas, cell, &text, font, ink).map(|_| ())
            }
        } else {
            render_text(&mut canvas, cell, &text, font, ink)
        };
        drawn.map_err(|source| SampleError::Render { feature, source })?;
    }
    Ok(canvas)
}
