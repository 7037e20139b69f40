//! Choices that sit between the raw inputs and the core planners.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

use supertml_core::font::GlyphFont;
use supertml_core::format::{measure_budgets, FormatOptions};
use supertml_core::importance::{estimate_importance, ImportanceVector};
use supertml_core::layout::{
    plan_equal_font, plan_equal_font_on_grid, plan_variant_font, scaled_tiers, CanvasSpec,
    LayoutMode, LayoutPlan, DEFAULT_FONT_TIERS,
};
use supertml_core::schema::{Sample, SchemaError, TabularSchema};

use crate::error::{Error, Result};
use crate::files::{load_importance, ScoreFormat};

/// Which feature columns use squared-word rendering.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SewSelection {
    /// Every categorical feature column.
    #[default]
    Auto,
    Off,
    Columns(Vec<String>),
}

impl FromStr for SewSelection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(SewSelection::Auto),
            "off" => Ok(SewSelection::Off),
            _ => {
                let cols: Vec<String> = s
                    .split(',')
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                    .map(str::to_string)
                    .collect();
                if cols.is_empty() {
                    Err("expected auto, off, or a comma-separated column list".into())
                } else {
                    Ok(SewSelection::Columns(cols))
                }
            }
        }
    }
}

impl SewSelection {
    pub fn resolve(&self, schema: &TabularSchema) -> Result<BTreeSet<usize>> {
        match self {
            SewSelection::Auto => Ok(schema
                .features()
                .enumerate()
                .filter(|(_, c)| !c.kind.is_numeric())
                .map(|(i, _)| i)
                .collect()),
            SewSelection::Off => Ok(BTreeSet::new()),
            SewSelection::Columns(names) => names
                .iter()
                .map(|name| {
                    let i = schema
                        .feature_index(name)
                        .ok_or_else(|| SchemaError::UnknownColumn(name.clone()))?;
                    if schema.feature(i).is_some_and(|c| c.kind.is_numeric()) {
                        return Err(Error::Usage(format!(
                            "column `{name}` is numeric; squared words apply to categorical columns"
                        )));
                    }
                    Ok(i)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImportanceChoice {
    Builtin,
    File(PathBuf),
}

impl FromStr for ImportanceChoice {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "builtin" => ImportanceChoice::Builtin,
            _ => ImportanceChoice::File(PathBuf::from(s)),
        })
    }
}

pub fn resolve_importance(
    choice: &ImportanceChoice,
    format: Option<ScoreFormat>,
    samples: &[Sample],
    schema: &TabularSchema,
) -> Result<ImportanceVector> {
    match choice {
        ImportanceChoice::Builtin => Ok(estimate_importance(samples, schema)?),
        ImportanceChoice::File(path) => load_importance(
            path,
            schema,
            format.unwrap_or_else(|| ScoreFormat::from_extension(path)),
        ),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanRequest {
    pub mode: LayoutMode,
    pub side: u32,
    /// Defaults to the reference margin scaled to `side`.
    pub margin: Option<u32>,
    /// Defaults to the reference tiers scaled to `side`.
    pub tiers: Option<Vec<u32>>,
    pub sew: SewSelection,
    pub importance: Option<ImportanceVector>,
    /// Keep this equal-font plan's grid instead of searching again.
    pub rescale_from: Option<LayoutPlan>,
}

impl PlanRequest {
    pub fn equal_font(side: u32) -> Self {
        PlanRequest {
            mode: LayoutMode::EqualFont,
            side,
            margin: None,
            tiers: None,
            sew: SewSelection::Auto,
            importance: None,
            rescale_from: None,
        }
    }

    pub fn canvas(&self) -> Result<CanvasSpec> {
        Ok(match self.margin {
            Some(m) => CanvasSpec::new(self.side, m)?,
            None => CanvasSpec::with_default_margin(self.side)?,
        })
    }
}

/// Measures character budgets over `samples` and plans a layout.
pub fn make_plan(
    samples: &[Sample],
    schema: &TabularSchema,
    opts: &FormatOptions,
    request: &PlanRequest,
    font: &GlyphFont,
) -> Result<LayoutPlan> {
    opts.validate(schema)?;
    opts.check_distinct(schema, samples)?;
    let canvas = request.canvas()?;
    let budgets = measure_budgets(samples, schema, opts).budgets;
    if let Some(base) = &request.rescale_from {
        let Some(shape) = base.grid.filter(|_| base.mode == LayoutMode::EqualFont) else {
            return Err(Error::Usage(
                "only equal-font plans can be rescaled; plan variant-font layouts afresh".into(),
            ));
        };
        return Ok(plan_equal_font_on_grid(
            &budgets,
            &canvas,
            &base.sew_features(),
            shape,
            font,
        )?);
    }
    let sew = request.sew.resolve(schema)?;
    match request.mode {
        LayoutMode::EqualFont => Ok(plan_equal_font(&budgets, &canvas, &sew, font)?),
        LayoutMode::VariantFont => {
            let importance = request
                .importance
                .as_ref()
                .ok_or_else(|| Error::Usage("variant-font plans need importance scores".into()))?;
            let tiers = match &request.tiers {
                Some(t) => t.clone(),
                None => scaled_tiers(&DEFAULT_FONT_TIERS, request.side),
            };
            Ok(plan_variant_font(
                &importance.scores,
                &budgets,
                &canvas,
                &tiers,
                &sew,
                font,
            )?)
        }
    }
}
