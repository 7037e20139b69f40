//! Layout planning: where each feature is drawn and at what font size.
//!
//! Two planners share one output type:
//!
//! * [`plan_equal_font`] puts features on an `r x c` grid row-major and gives
//!   every feature the same font size. It enumerates every grid with
//!   `r * c >= n`, `r, c <= n`, computes the largest uniform size each grid
//!   admits, and keeps the best (ties: smallest `|r - c|`, then fewer rows).
//! * [`plan_variant_font`] ranks features by importance, maps ranks to font
//!   tiers by cumulative importance mass, and packs the resulting text boxes
//!   with guillotine cuts, largest first.
//!
//! Every plan keeps at least `margin` pixels between any two cells along one
//! axis; [`validate_plan`] checks that and the other plan invariants.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::font::{GlyphFont, MIN_FONT_SIZE};

/// Canvas side the default margin and font tiers are expressed for.
pub const REFERENCE_SIDE: u32 = 224;
/// Inter-cell gap at [`REFERENCE_SIDE`].
pub const REFERENCE_MARGIN: u32 = 2;
pub const DEFAULT_FONT_TIERS: [u32; 6] = [48, 32, 24, 16, 12, 8];

const MASS_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanvasSpec {
    pub side: u32,
    pub margin: u32,
    pub background: u8,
    pub foreground: u8,
}

impl CanvasSpec {
    pub fn new(side: u32, margin: u32) -> Result<Self, LayoutError> {
        let canvas = CanvasSpec {
            side,
            margin,
            background: 255,
            foreground: 0,
        };
        canvas.check()?;
        Ok(canvas)
    }

    /// Canvas with the reference margin scaled to `side`.
    pub fn with_default_margin(side: u32) -> Result<Self, LayoutError> {
        Self::new(side, scale_round(REFERENCE_MARGIN, side).max(1))
    }

    pub fn check(&self) -> Result<(), LayoutError> {
        if self.side == 0 || 2 * u64::from(self.margin) >= u64::from(self.side) {
            return Err(LayoutError::InvalidCanvas {
                side: self.side,
                margin: self.margin,
            });
        }
        Ok(())
    }
}

/// `value * side / REFERENCE_SIDE`, rounded half up.
pub fn scale_round(value: u32, side: u32) -> u32 {
    let num = 2 * u64::from(value) * u64::from(side) + u64::from(REFERENCE_SIDE);
    (num / (2 * u64::from(REFERENCE_SIDE))) as u32
}

/// Font tiers scaled from the reference side to `side`, clamped to the
/// minimum legible size and de-duplicated so they stay strictly descending.
pub fn scaled_tiers(tiers: &[u32], side: u32) -> Vec<u32> {
    let mut out: Vec<u32> = tiers
        .iter()
        .map(|t| scale_round(*t, side).max(MIN_FONT_SIZE))
        .collect();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSpec {
    pub feature_index: usize,
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
    pub font_size: u32,
    /// Drawn as a squared word.
    #[serde(default)]
    pub sew: bool,
}

impl CellSpec {
    pub fn right(&self) -> u64 {
        u64::from(self.x) + u64::from(self.width)
    }

    pub fn bottom(&self) -> u64 {
        u64::from(self.y) + u64::from(self.height)
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && u64::from(x) < self.right() && y >= self.y && u64::from(y) < self.bottom()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutMode {
    EqualFont,
    VariantFont,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    pub rows: u32,
    pub cols: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutPlan {
    pub canvas: CanvasSpec,
    pub mode: LayoutMode,
    /// One cell per feature, ordered by feature index.
    pub cells: Vec<CellSpec>,
    pub char_budget: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridShape>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub font_tiers: Vec<u32>,
}

impl LayoutPlan {
    pub fn n_features(&self) -> usize {
        self.char_budget.len()
    }

    pub fn cell(&self, feature: usize) -> Option<&CellSpec> {
        self.cells.iter().find(|c| c.feature_index == feature)
    }

    pub fn sew_features(&self) -> BTreeSet<usize> {
        self.cells
            .iter()
            .filter(|c| c.sew)
            .map(|c| c.feature_index)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("invalid canvas: side {side}, margin {margin}")]
    InvalidCanvas { side: u32, margin: u32 },
    #[error("a layout needs at least one feature")]
    NoFeatures,
    #[error("expected {expected} entries, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("feature {0} has a zero character budget")]
    ZeroBudget(usize),
    #[error("squared-word feature {0} does not exist")]
    SewOutOfRange(usize),
    #[error("feature {feature} cannot be laid out at the minimum font size")]
    Infeasible { feature: usize },
    #[error("feature {feature} has a non-finite or negative importance {value}")]
    BadImportance { feature: usize, value: f64 },
    #[error("font tiers must be non-empty, strictly descending and at least {MIN_FONT_SIZE}")]
    BadTiers,
}

/// `ceil(sqrt(len))`: the side of the character grid of a squared word.
pub fn sew_arity(len: usize) -> u32 {
    let mut g: u64 = 0;
    while g * g < len as u64 {
        g += 1;
    }
    g as u32
}

fn check_budgets(budgets: &[usize], sew: &BTreeSet<usize>) -> Result<(), LayoutError> {
    if budgets.is_empty() {
        return Err(LayoutError::NoFeatures);
    }
    if let Some(i) = budgets.iter().position(|b| *b == 0) {
        return Err(LayoutError::ZeroBudget(i));
    }
    if let Some(&i) = sew.iter().find(|i| **i >= budgets.len()) {
        return Err(LayoutError::SewOutOfRange(i));
    }
    Ok(())
}

/// Largest font size at which feature text of `budget` characters fits a
/// `width` x `height` allocation. Squared words need `arity * size` to fit
/// the square side.
fn fit_size(font: &GlyphFont, budget: usize, sew: bool, width: u32, height: u32) -> u32 {
    if sew {
        width.min(height) / sew_arity(budget)
    } else {
        font.max_size_for(budget, width, height)
    }
}

/// Boundaries `round(j * (side - margin) / n)` for `j = 0..=n`; track `j`
/// spans `[b_j + margin, b_{j+1})`.
fn track_bounds(side: u32, margin: u32, n: u32) -> Vec<u32> {
    let span = u64::from(side - margin);
    let n = u64::from(n);
    (0..=n)
        .map(|j| ((2 * j * span + n) / (2 * n)) as u32)
        .collect()
}

struct Grid {
    shape: GridShape,
    xs: Vec<u32>,
    ys: Vec<u32>,
    margin: u32,
}

impl Grid {
    fn new(canvas: &CanvasSpec, shape: GridShape) -> Self {
        Grid {
            shape,
            xs: track_bounds(canvas.side, canvas.margin, shape.cols),
            ys: track_bounds(canvas.side, canvas.margin, shape.rows),
            margin: canvas.margin,
        }
    }

    /// Allocation `(x, y, w, h)` of the `k`-th slot in row-major order.
    fn slot(&self, k: usize) -> (u32, u32, u32, u32) {
        let cols = self.shape.cols as usize;
        let (r, c) = (k / cols, k % cols);
        let x = self.xs[c] + self.margin;
        let y = self.ys[r] + self.margin;
        let w = self.xs[c + 1].saturating_sub(x);
        let h = self.ys[r + 1].saturating_sub(y);
        (x, y, w, h)
    }

    fn uniform_size(&self, font: &GlyphFont, budgets: &[usize], sew: &BTreeSet<usize>) -> u32 {
        budgets
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let (_, _, w, h) = self.slot(k);
                fit_size(font, *b, sew.contains(&k), w, h)
            })
            .min()
            .unwrap_or(0)
    }

    fn cells(&self, budgets: &[usize], sew: &BTreeSet<usize>, size: u32) -> Vec<CellSpec> {
        (0..budgets.len())
            .map(|k| {
                let (x, y, w, h) = self.slot(k);
                let is_sew = sew.contains(&k);
                let (width, height) = if is_sew {
                    let side = w.min(h);
                    (side, side)
                } else {
                    (w, h)
                };
                CellSpec {
                    feature_index: k,
                    x,
                    y,
                    width,
                    height,
                    font_size: size,
                    sew: is_sew,
                }
            })
            .collect()
    }
}

/// Uniform font size the grid `shape` admits, or `None` when it is below
/// the minimum legible size.
pub fn equal_font_size(
    budgets: &[usize],
    canvas: &CanvasSpec,
    sew: &BTreeSet<usize>,
    shape: GridShape,
    font: &GlyphFont,
) -> Option<u32> {
    if (shape.rows as usize) * (shape.cols as usize) < budgets.len() {
        return None;
    }
    let size = Grid::new(canvas, shape).uniform_size(font, budgets, sew);
    (size >= MIN_FONT_SIZE).then_some(size)
}

fn blocking_feature(budgets: &[usize], sew: &BTreeSet<usize>, font: &GlyphFont) -> usize {
    let need = |k: usize| -> u64 {
        if sew.contains(&k) {
            u64::from(sew_arity(budgets[k]) * MIN_FONT_SIZE)
        } else {
            font.text_width(budgets[k], MIN_FONT_SIZE)
        }
    };
    // max_by_key keeps the last maximum; iterate in reverse to keep the first.
    (0..budgets.len())
        .rev()
        .max_by_key(|k| need(*k))
        .unwrap_or(0)
}

/// Equal-font plan: the grid shape admitting the largest uniform font size.
pub fn plan_equal_font(
    budgets: &[usize],
    canvas: &CanvasSpec,
    sew: &BTreeSet<usize>,
    font: &GlyphFont,
) -> Result<LayoutPlan, LayoutError> {
    canvas.check()?;
    check_budgets(budgets, sew)?;
    let n = budgets.len() as u32;

    let mut best: Option<(u32, GridShape)> = None;
    for rows in 1..=n {
        for cols in 1..=n {
            let shape = GridShape { rows, cols };
            let Some(size) = equal_font_size(budgets, canvas, sew, shape, font) else {
                continue;
            };
            let better = match best {
                None => true,
                Some((best_size, b)) => {
                    let key = |s: GridShape| (s.rows.abs_diff(s.cols), s.rows);
                    size > best_size || (size == best_size && key(shape) < key(b))
                }
            };
            if better {
                best = Some((size, shape));
            }
        }
    }
    let (size, shape) = best.ok_or(LayoutError::Infeasible {
        feature: blocking_feature(budgets, sew, font),
    })?;
    Ok(equal_font_plan(budgets, canvas, sew, shape, size))
}

/// Equal-font plan on a caller-chosen grid. Used to carry a plan's
/// arrangement to another canvas size.
pub fn plan_equal_font_on_grid(
    budgets: &[usize],
    canvas: &CanvasSpec,
    sew: &BTreeSet<usize>,
    shape: GridShape,
    font: &GlyphFont,
) -> Result<LayoutPlan, LayoutError> {
    canvas.check()?;
    check_budgets(budgets, sew)?;
    let size =
        equal_font_size(budgets, canvas, sew, shape, font).ok_or(LayoutError::Infeasible {
            feature: blocking_feature(budgets, sew, font),
        })?;
    Ok(equal_font_plan(budgets, canvas, sew, shape, size))
}

fn equal_font_plan(
    budgets: &[usize],
    canvas: &CanvasSpec,
    sew: &BTreeSet<usize>,
    shape: GridShape,
    size: u32,
) -> LayoutPlan {
    LayoutPlan {
        canvas: *canvas,
        mode: LayoutMode::EqualFont,
        cells: Grid::new(canvas, shape).cells(budgets, sew, size),
        char_budget: budgets.to_vec(),
        grid: Some(shape),
        font_tiers: Vec::new(),
    }
}

/// Feature indices by descending score, ties by ascending index.
pub fn importance_ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| {
        scores[*b]
            .partial_cmp(&scores[*a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    });
    order
}

/// Tier group (0 = largest font) for every feature.
///
/// Ranks are cut into `tiers` contiguous groups by cumulative importance
/// mass: the feature at a rank whose preceding mass is `C` lands in group
/// `floor(tiers * C / total)`. Features with equal scores share the group of
/// the first of them, so all-equal scores give a single group.
pub fn tier_groups(scores: &[f64], tiers: usize) -> Vec<usize> {
    let order = importance_ranking(scores);
    let total: f64 = scores.iter().sum();
    let mut groups = alloc::vec![0; scores.len()];
    let mut preceding = 0.0;
    let mut prev: Option<(f64, usize)> = None;
    for &feature in &order {
        let score = scores[feature];
        let group = match prev {
            Some((p, g)) if p == score => g,
            _ if total <= 0.0 => 0,
            _ => {
                let position = tiers as f64 * preceding / total + MASS_EPSILON;
                (libm::floor(position) as usize).min(tiers - 1)
            }
        };
        groups[feature] = group;
        prev = Some((score, group));
        preceding += score;
    }
    groups
}

#[derive(Debug, Clone, Copy)]
struct FreeRect {
    x: u32,
    y: u32,
    w: u32,
    h: u32,
}

impl FreeRect {
    fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }
}

/// Guillotine packer over the canvas interior. Each placement takes the
/// top-left corner of the smallest free rectangle that fits and cuts the
/// remainder into two pieces separated from the placed box by `margin`.
/// Cut direction alternates with placement order.
struct Guillotine {
    free: Vec<FreeRect>,
    margin: u32,
    placed: usize,
}

impl Guillotine {
    fn new(canvas: &CanvasSpec) -> Self {
        let inner = canvas.side - 2 * canvas.margin;
        Guillotine {
            free: alloc::vec![FreeRect {
                x: canvas.margin,
                y: canvas.margin,
                w: inner,
                h: inner,
            }],
            margin: canvas.margin,
            placed: 0,
        }
    }

    fn place(&mut self, w: u32, h: u32) -> Option<(u32, u32)> {
        let (index, _) = self
            .free
            .iter()
            .enumerate()
            .filter(|(_, r)| r.w >= w && r.h >= h)
            .min_by_key(|(i, r)| (r.area(), *i))?;
        let r = self.free.remove(index);
        let m = self.margin;
        let right_w = r.w.checked_sub(w + m).filter(|v| *v > 0);
        let below_h = r.h.checked_sub(h + m).filter(|v| *v > 0);
        let vertical_cut = self.placed.is_multiple_of(2);
        if let Some(rw) = right_w {
            self.free.push(FreeRect {
                x: r.x + w + m,
                y: r.y,
                w: rw,
                h: if vertical_cut { r.h } else { h },
            });
        }
        if let Some(bh) = below_h {
            self.free.push(FreeRect {
                x: r.x,
                y: r.y + h + m,
                w: if vertical_cut { w } else { r.w },
                h: bh,
            });
        }
        self.placed += 1;
        Some((r.x, r.y))
    }
}

fn box_size(font: &GlyphFont, budget: usize, sew: bool, size: u32) -> (u32, u32) {
    if sew {
        let side = sew_arity(budget) * size;
        (side, side)
    } else {
        let width = font.text_width(budget, size).min(u64::from(u32::MAX)) as u32;
        (width, font.line_height(size))
    }
}

/// Packs features in `order` at the given per-feature sizes. On failure
/// returns the first feature that did not fit.
fn pack(
    canvas: &CanvasSpec,
    budgets: &[usize],
    sew: &BTreeSet<usize>,
    sizes: &[u32],
    order: &[usize],
    font: &GlyphFont,
) -> Result<Vec<CellSpec>, usize> {
    let mut packer = Guillotine::new(canvas);
    let mut cells = Vec::with_capacity(order.len());
    for &feature in order {
        let is_sew = sew.contains(&feature);
        let (w, h) = box_size(font, budgets[feature], is_sew, sizes[feature]);
        let (x, y) = packer.place(w, h).ok_or(feature)?;
        cells.push(CellSpec {
            feature_index: feature,
            x,
            y,
            width: w,
            height: h,
            font_size: sizes[feature],
            sew: is_sew,
        });
    }
    cells.sort_by_key(|c| c.feature_index);
    Ok(cells)
}

/// Variant-font plan driven by per-feature importance scores.
///
/// Features get tiers from [`tier_groups`]. When the boxes do not pack, every
/// feature is demoted by one tier (bottoming out at the smallest) and packing
/// is retried; if the all-smallest attempt fails too the plan is infeasible.
pub fn plan_variant_font(
    scores: &[f64],
    budgets: &[usize],
    canvas: &CanvasSpec,
    tiers: &[u32],
    sew: &BTreeSet<usize>,
    font: &GlyphFont,
) -> Result<LayoutPlan, LayoutError> {
    canvas.check()?;
    check_budgets(budgets, sew)?;
    if scores.len() != budgets.len() {
        return Err(LayoutError::Arity {
            expected: budgets.len(),
            found: scores.len(),
        });
    }
    if let Some((feature, &value)) = scores
        .iter()
        .enumerate()
        .find(|(_, s)| !s.is_finite() || **s < 0.0)
    {
        return Err(LayoutError::BadImportance { feature, value });
    }
    if tiers.is_empty()
        || tiers.windows(2).any(|w| w[0] <= w[1])
        || tiers[tiers.len() - 1] < MIN_FONT_SIZE
    {
        return Err(LayoutError::BadTiers);
    }

    let order = importance_ranking(scores);
    let groups = tier_groups(scores, tiers.len());
    let last = tiers.len() - 1;
    let mut blocked = order[0];
    for demotion in 0..tiers.len() {
        let sizes: Vec<u32> = groups
            .iter()
            .map(|g| tiers[(g + demotion).min(last)])
            .collect();
        match pack(canvas, budgets, sew, &sizes, &order, font) {
            Ok(cells) => {
                return Ok(LayoutPlan {
                    canvas: *canvas,
                    mode: LayoutMode::VariantFont,
                    cells,
                    char_budget: budgets.to_vec(),
                    grid: None,
                    font_tiers: tiers.to_vec(),
                })
            }
            Err(feature) => blocked = feature,
        }
        if groups.iter().all(|g| g + demotion >= last) {
            break;
        }
    }
    Err(LayoutError::Infeasible { feature: blocked })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    InvalidCanvas,
    OutOfBounds {
        feature: usize,
    },
    FontTooSmall {
        feature: usize,
        font_size: u32,
    },
    EmptyCell {
        feature: usize,
    },
    DuplicateFeature {
        feature: usize,
    },
    MissingFeature {
        feature: usize,
    },
    UnknownFeature {
        feature: usize,
    },
    Overlap {
        first: usize,
        second: usize,
    },
    MarginBreach {
        first: usize,
        second: usize,
        gap: u32,
    },
}

/// Gap between two cells along one axis (0 when their spans intersect).
fn axis_gap(a_start: u64, a_end: u64, b_start: u64, b_end: u64) -> Option<u64> {
    if a_end <= b_start {
        Some(b_start - a_end)
    } else if b_end <= a_start {
        Some(a_start - b_end)
    } else {
        None
    }
}

/// Checks every plan invariant; an empty list means the plan is valid.
pub fn validate_plan(plan: &LayoutPlan) -> Vec<Violation> {
    let mut out = Vec::new();
    let canvas = &plan.canvas;
    if canvas.check().is_err() {
        out.push(Violation::InvalidCanvas);
    }
    let n = plan.n_features();
    let mut seen = alloc::vec![false; n];
    for cell in &plan.cells {
        let f = cell.feature_index;
        if f >= n {
            out.push(Violation::UnknownFeature { feature: f });
        } else if seen[f] {
            out.push(Violation::DuplicateFeature { feature: f });
        } else {
            seen[f] = true;
        }
        if cell.width == 0 || cell.height == 0 {
            out.push(Violation::EmptyCell { feature: f });
        }
        let side = u64::from(canvas.side);
        if cell.right() > side || cell.bottom() > side {
            out.push(Violation::OutOfBounds { feature: f });
        }
        if cell.font_size < MIN_FONT_SIZE {
            out.push(Violation::FontTooSmall {
                feature: f,
                font_size: cell.font_size,
            });
        }
    }
    for (f, present) in seen.iter().enumerate() {
        if !present {
            out.push(Violation::MissingFeature { feature: f });
        }
    }
    for (i, a) in plan.cells.iter().enumerate() {
        for b in &plan.cells[i + 1..] {
            let gx = axis_gap(u64::from(a.x), a.right(), u64::from(b.x), b.right());
            let gy = axis_gap(u64::from(a.y), a.bottom(), u64::from(b.y), b.bottom());
            let (first, second) = (a.feature_index, b.feature_index);
            match (gx, gy) {
                (None, None) => out.push(Violation::Overlap { first, second }),
                _ => {
                    let gap = gx.unwrap_or(0).max(gy.unwrap_or(0));
                    if gap < u64::from(canvas.margin) {
                        out.push(Violation::MarginBreach {
                            first,
                            second,
                            gap: gap as u32,
                        });
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn font() -> GlyphFont {
        GlyphFont::embedded()
    }

    fn none() -> BTreeSet<usize> {
        BTreeSet::new()
    }

    fn c224() -> CanvasSpec {
        CanvasSpec::with_default_margin(224).unwrap()
    }

    /// Independent oracle: every grid shape, every candidate size from the
    /// canvas side down, fit checked cell by cell with float geometry.
    fn oracle_best_size(
        budgets: &[usize],
        canvas: &CanvasSpec,
        sew: &BTreeSet<usize>,
    ) -> Option<u32> {
        let n = budgets.len();
        let (s, m) = (canvas.side as f64, canvas.margin as f64);
        let bound = |j: usize, k: usize| libm::floor(j as f64 * (s - m) / k as f64 + 0.5) as i64;
        let mut best = None;
        for r in 1..=n {
            for c in 1..=n {
                if r * c < n {
                    continue;
                }
                'size: for size in (MIN_FONT_SIZE..=canvas.side).rev() {
                    for (k, b) in budgets.iter().enumerate() {
                        let (row, col) = (k / c, k % c);
                        let w = bound(col + 1, c) - bound(col, c) - m as i64;
                        let h = bound(row + 1, r) - bound(row, r) - m as i64;
                        let ok = if sew.contains(&k) {
                            let g = libm::ceil(libm::sqrt(*b as f64)) as i64;
                            g * size as i64 <= w.min(h)
                        } else {
                            (*b as i64) * (size as i64 * 4 / 6) <= w && size as i64 <= h
                        };
                        if !ok {
                            continue 'size;
                        }
                    }
                    best = best.max(Some(size));
                    break;
                }
            }
        }
        best
    }

    #[test]
    fn canvas_invariants() {
        assert!(CanvasSpec::new(0, 0).is_err());
        assert!(CanvasSpec::new(10, 5).is_err());
        assert!(CanvasSpec::new(10, 4).is_ok());
        assert_eq!(CanvasSpec::with_default_margin(224).unwrap().margin, 2);
        assert_eq!(CanvasSpec::with_default_margin(331).unwrap().margin, 3);
        assert_eq!(CanvasSpec::with_default_margin(128).unwrap().margin, 1);
    }

    #[test]
    fn tiers_scale_with_canvas() {
        assert_eq!(scaled_tiers(&DEFAULT_FONT_TIERS, 224), DEFAULT_FONT_TIERS);
        assert_eq!(
            scaled_tiers(&DEFAULT_FONT_TIERS, 331),
            [71, 47, 35, 24, 18, 12]
        );
        assert_eq!(
            scaled_tiers(&DEFAULT_FONT_TIERS, 128),
            [27, 18, 14, 9, 7, 6]
        );
        assert_eq!(scaled_tiers(&[8, 7], 100), [6]);
    }

    #[test]
    fn sew_arity_is_ceil_sqrt() {
        let expect = [0, 1, 2, 2, 2, 3, 3, 3, 3, 3, 4];
        for (len, g) in expect.iter().enumerate() {
            assert_eq!(sew_arity(len), *g, "len {len}");
        }
        assert_eq!(sew_arity(7), 3);
        assert_eq!(sew_arity(25), 5);
        assert_eq!(sew_arity(26), 6);
    }

    #[test]
    fn single_feature_spans_canvas() {
        let plan = plan_equal_font(&[3], &c224(), &none(), &font()).unwrap();
        assert_eq!(plan.grid, Some(GridShape { rows: 1, cols: 1 }));
        let cell = plan.cells[0];
        assert_eq!((cell.x, cell.y, cell.width, cell.height), (2, 2, 220, 220));
    }

    #[test]
    fn four_short_features_use_quadrants() {
        let plan = plan_equal_font(&[3, 3, 3, 3], &c224(), &none(), &font()).unwrap();
        assert_eq!(plan.grid, Some(GridShape { rows: 2, cols: 2 }));
        let corners: Vec<_> = plan.cells.iter().map(|c| (c.x, c.y)).collect();
        assert_eq!(corners, [(2, 2), (113, 2), (2, 113), (113, 113)]);
        assert!(plan.cells.iter().all(|c| c.width == 109 && c.height == 109));
        assert!(plan.cells.iter().all(|c| c.font_size == 55));
        assert_eq!(oracle_best_size(&[3, 3, 3, 3], &c224(), &none()), Some(55));
        assert!(validate_plan(&plan).is_empty());
    }

    #[test]
    fn equal_font_matches_oracle_on_higgs_like_budgets() {
        let budgets: Vec<usize> = (0..30).map(|i| [7, 8, 6, 9, 5][i % 5]).collect();
        let plan = plan_equal_font(&budgets, &c224(), &none(), &font()).unwrap();
        let size = plan.cells[0].font_size;
        assert!(plan.cells.iter().all(|c| c.font_size == size));
        assert_eq!(Some(size), oracle_best_size(&budgets, &c224(), &none()));
        assert!(validate_plan(&plan).is_empty());
        // One pixel more does not fit on any enumerated grid.
        for rows in 1..=30 {
            for cols in 1..=30 {
                let shape = GridShape { rows, cols };
                if let Some(s) = equal_font_size(&budgets, &c224(), &none(), shape, &font()) {
                    assert!(s <= size);
                }
            }
        }
    }

    #[test]
    fn equal_font_with_sew_reserves_square() {
        let sew: BTreeSet<usize> = [1].into();
        let budgets = [4, 7, 2];
        let plan = plan_equal_font(&budgets, &c224(), &sew, &font()).unwrap();
        let cell = plan.cells[1];
        assert!(cell.sew);
        assert_eq!(cell.width, cell.height);
        assert!(sew_arity(7) * cell.font_size <= cell.width);
        assert_eq!(
            Some(cell.font_size),
            oracle_best_size(&budgets, &c224(), &sew)
        );
        assert!(validate_plan(&plan).is_empty());
    }

    #[test]
    fn equal_font_infeasible_names_widest_feature() {
        let canvas = CanvasSpec::new(32, 1).unwrap();
        let err = plan_equal_font(&[2, 30, 3], &canvas, &none(), &font()).unwrap_err();
        assert_eq!(err, LayoutError::Infeasible { feature: 1 });
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let c = c224();
        assert_eq!(
            plan_equal_font(&[], &c, &none(), &font()),
            Err(LayoutError::NoFeatures)
        );
        assert_eq!(
            plan_equal_font(&[1, 0], &c, &none(), &font()),
            Err(LayoutError::ZeroBudget(1))
        );
        let sew: BTreeSet<usize> = [5].into();
        assert_eq!(
            plan_equal_font(&[1], &c, &sew, &font()),
            Err(LayoutError::SewOutOfRange(5))
        );
        let t = &DEFAULT_FONT_TIERS;
        assert!(matches!(
            plan_variant_font(&[1.0, f64::NAN], &[2, 2], &c, t, &none(), &font()),
            Err(LayoutError::BadImportance { feature: 1, .. })
        ));
        assert!(matches!(
            plan_variant_font(&[1.0, -1.0], &[2, 2], &c, t, &none(), &font()),
            Err(LayoutError::BadImportance { feature: 1, .. })
        ));
        assert_eq!(
            plan_variant_font(&[1.0], &[2], &c, &[8, 8], &none(), &font()),
            Err(LayoutError::BadTiers)
        );
        assert_eq!(
            plan_variant_font(&[1.0], &[2], &c, &[], &none(), &font()),
            Err(LayoutError::BadTiers)
        );
        assert_eq!(
            plan_variant_font(&[1.0], &[2, 3], &c, t, &none(), &font()),
            Err(LayoutError::Arity {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn ranking_breaks_ties_by_index() {
        assert_eq!(importance_ranking(&[3.0, 1.0, 2.0]), [0, 2, 1]);
        assert_eq!(importance_ranking(&[1.0, 1.0, 1.0]), [0, 1, 2]);
        assert_eq!(importance_ranking(&[0.0, 2.0, 2.0, 1.0]), [1, 2, 3, 0]);
    }

    #[test]
    fn equal_scores_share_top_tier() {
        assert_eq!(tier_groups(&[0.5; 7], 6), [0; 7]);
        let plan = plan_variant_font(
            &[1.0; 4],
            &[3; 4],
            &c224(),
            &DEFAULT_FONT_TIERS,
            &none(),
            &font(),
        )
        .unwrap();
        assert!(plan.cells.iter().all(|c| c.font_size == 48));
        assert!(validate_plan(&plan).is_empty());
    }

    #[test]
    fn mass_grouping() {
        // Preceding mass fractions 0, .5, .75, .875 of 16.
        assert_eq!(tier_groups(&[8.0, 4.0, 2.0, 2.0], 4), [0, 2, 3, 3]);
        assert_eq!(tier_groups(&[2.0, 4.0, 8.0, 1.0, 1.0], 2), [1, 1, 0, 1, 1]);
        assert_eq!(tier_groups(&[0.0, 0.0], 3), [0, 0]);
    }

    /// Enumerates every non-increasing assignment of tier indices along the
    /// ranking and checks the planner's sizes are one of them.
    fn rank_consistent_assignments(n: usize, tiers: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; n];
        fn rec(i: usize, lo: usize, tiers: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if i == cur.len() {
                out.push(cur.clone());
                return;
            }
            for t in lo..tiers {
                cur[i] = t;
                rec(i + 1, t, tiers, cur, out);
            }
        }
        rec(0, 0, tiers, &mut cur, &mut out);
        out
    }

    #[test]
    fn three_feature_ordering_matches_enumeration() {
        let tiers = DEFAULT_FONT_TIERS;
        let plan = plan_variant_font(
            &[3.0, 1.0, 2.0],
            &[4, 4, 4],
            &c224(),
            &tiers,
            &none(),
            &font(),
        )
        .unwrap();
        let size = |f: usize| plan.cell(f).unwrap().font_size;
        assert!(size(0) >= size(2) && size(2) >= size(1));
        // Rank order is (0, 2, 1); the sizes must be one of the assignments
        // that are non-increasing along it.
        let by_rank = [size(0), size(2), size(1)];
        let allowed = rank_consistent_assignments(3, tiers.len());
        assert!(allowed
            .iter()
            .any(|a| a.iter().zip(&by_rank).all(|(t, s)| tiers[*t] == *s)));
        // Mass fractions 0, 1/2, 5/6 -> groups 0, 3, 5.
        assert_eq!(by_rank, [48, 16, 8]);
        assert!(validate_plan(&plan).is_empty());
    }

    #[test]
    fn variant_font_demotes_until_it_packs() {
        // Twelve features at 48 px cannot share a 224 canvas.
        let plan = plan_variant_font(
            &[1.0; 12],
            &[5; 12],
            &c224(),
            &DEFAULT_FONT_TIERS,
            &none(),
            &font(),
        )
        .unwrap();
        let size = plan.cells[0].font_size;
        assert!(size < 48);
        assert!(plan.cells.iter().all(|c| c.font_size == size));
        assert!(validate_plan(&plan).is_empty());
    }

    #[test]
    fn variant_font_infeasible_at_smallest_tier() {
        let canvas = CanvasSpec::new(40, 1).unwrap();
        let err = plan_variant_font(&[2.0, 1.0], &[20, 20], &canvas, &[12, 8], &none(), &font())
            .unwrap_err();
        assert_eq!(err, LayoutError::Infeasible { feature: 0 });
    }

    fn cell(feature: usize, x: u32, y: u32, w: u32, h: u32) -> CellSpec {
        CellSpec {
            feature_index: feature,
            x,
            y,
            width: w,
            height: h,
            font_size: 10,
            sew: false,
        }
    }

    fn hand_plan(cells: Vec<CellSpec>) -> LayoutPlan {
        LayoutPlan {
            canvas: c224(),
            mode: LayoutMode::EqualFont,
            char_budget: vec![1; cells.len()],
            cells,
            grid: None,
            font_tiers: vec![],
        }
    }

    #[test]
    fn coincident_cells_give_one_overlap() {
        let plan = hand_plan(vec![cell(0, 10, 10, 50, 50), cell(1, 10, 10, 50, 50)]);
        assert_eq!(
            validate_plan(&plan),
            [Violation::Overlap {
                first: 0,
                second: 1
            }]
        );
    }

    #[test]
    fn cell_past_edge_gives_one_bounds_violation() {
        let plan = hand_plan(vec![cell(0, 10, 10, 50, 50), cell(1, 200, 100, 30, 20)]);
        assert_eq!(
            validate_plan(&plan),
            [Violation::OutOfBounds { feature: 1 }]
        );
    }

    #[test]
    fn touching_cells_breach_margin() {
        let plan = hand_plan(vec![cell(0, 10, 10, 50, 50), cell(1, 61, 10, 50, 50)]);
        assert_eq!(
            validate_plan(&plan),
            [Violation::MarginBreach {
                first: 0,
                second: 1,
                gap: 1
            }]
        );
        // Diagonal neighbours separated on one axis only are fine.
        let plan = hand_plan(vec![cell(0, 10, 10, 50, 50), cell(1, 62, 40, 50, 50)]);
        assert!(validate_plan(&plan).is_empty());
    }

    #[test]
    fn feature_coverage_is_checked() {
        let mut plan = hand_plan(vec![cell(0, 10, 10, 20, 20), cell(0, 100, 100, 20, 20)]);
        plan.char_budget = vec![1, 1];
        let v = validate_plan(&plan);
        assert!(v.contains(&Violation::DuplicateFeature { feature: 0 }));
        assert!(v.contains(&Violation::MissingFeature { feature: 1 }));
        let mut small = hand_plan(vec![cell(0, 10, 10, 20, 20)]);
        small.cells[0].font_size = 5;
        assert_eq!(
            validate_plan(&small),
            [Violation::FontTooSmall {
                feature: 0,
                font_size: 5
            }]
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn budgets(max_n: usize) -> impl Strategy<Value = Vec<usize>> {
            prop::collection::vec(1usize..12, 1..=max_n)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn equal_font_plans_are_valid_and_maximal(b in budgets(16), side in 128u32..400) {
                let canvas = CanvasSpec::with_default_margin(side).unwrap();
                let oracle = oracle_best_size(&b, &canvas, &none());
                match plan_equal_font(&b, &canvas, &none(), &font()) {
                    Ok(plan) => {
                        prop_assert!(validate_plan(&plan).is_empty());
                        prop_assert_eq!(Some(plan.cells[0].font_size), oracle);
                    }
                    Err(LayoutError::Infeasible { .. }) => prop_assert_eq!(oracle, None),
                    Err(e) => prop_assert!(false, "{e}"),
                }
            }

            #[test]
            fn variant_font_is_rank_monotone(
                scores in prop::collection::vec(0.0f64..10.0, 1..20),
                side in 128u32..400,
                scale in 0.01f64..100.0,
            ) {
                let b = alloc::vec![4; scores.len()];
                let canvas = CanvasSpec::with_default_margin(side).unwrap();
                let tiers = scaled_tiers(&DEFAULT_FONT_TIERS, side);
                let Ok(plan) = plan_variant_font(&scores, &b, &canvas, &tiers, &none(), &font()) else {
                    return Ok(());
                };
                prop_assert!(validate_plan(&plan).is_empty());
                for i in 0..scores.len() {
                    for j in 0..scores.len() {
                        if scores[i] > scores[j] {
                            prop_assert!(plan.cells[i].font_size >= plan.cells[j].font_size);
                        }
                    }
                }
                let scaled: Vec<f64> = scores.iter().map(|s| s * scale).collect();
                let again = plan_variant_font(&scaled, &b, &canvas, &tiers, &none(), &font()).unwrap();
                prop_assert_eq!(plan, again);
            }
        }
    }
}
