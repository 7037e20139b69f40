//! The `supertml` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use supertml_core::font::GlyphFont;
use supertml_core::format::{FormatOptions, DEFAULT_MISSING_TEXT};
use supertml_core::layout::{validate_plan, LayoutMode};
use supertml_core::schema::{default_missing_tokens, Sample, TabularSchema};

use crate::dataset::{
    infer_table_schema, load_schema, read_table, schema_to_json, LabelSelector, ReadOptions,
};
use crate::emit::{emit_dataset, emit_split, parse_manifest, EmitOptions, SplitRatio};
use crate::error::{exit, Error, Result};
use crate::files::{
    decode_png, importance_to_csv, importance_to_json, load_abbreviations, plan_to_json, read_plan,
    write_file, ScoreFormat,
};
use crate::pipeline::{make_plan, resolve_importance, ImportanceChoice, PlanRequest, SewSelection};

#[derive(Debug, Parser)]
#[command(name = "supertml", version, about = "Render table rows as text images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infer and print the column schema of a table.
    Schema {
        #[command(flatten)]
        input: InputArgs,
        /// Write the schema here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a layout plan and print it as JSON.
    Plan {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        format: FormatArgs,
        #[command(flatten)]
        layout: LayoutArgs,
        /// Write the plan here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render every row to a PNG and write a manifest.
    Convert(Box<ConvertArgs>),
    /// Check a plan file or an emitted manifest.
    Validate {
        /// A plan JSON file, a manifest.tsv, or a directory holding one.
        path: PathBuf,
        /// Also decode every image and check its size against the plan.
        #[arg(long)]
        images: bool,
    },
    /// Estimate per-feature importance with the built-in estimator.
    Importance {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = ScoreFormat::Json)]
        format: ScoreFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub format: FormatArgs,
    #[command(flatten)]
    pub layout: LayoutArgs,
    /// Use this plan instead of planning from the data.
    #[arg(long, conflicts_with_all = ["mode", "size", "margin", "importance", "tiers", "sew", "rescale_from"])]
    pub plan: Option<PathBuf>,
    /// Output directory; must be empty or absent.
    #[arg(long)]
    pub out: PathBuf,
    /// Seeded random TRAIN:TEST split into `out/train` and `out/test`.
    #[arg(long)]
    pub split: Option<SplitRatio>,
    #[arg(long, default_value_t = 0, requires = "split")]
    pub seed: u64,
    /// Render threads; 0 uses one per core.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Put images under one directory per class.
    #[arg(long)]
    pub by_class_dirs: bool,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Delimited text table.
    pub input: PathBuf,
    /// Field delimiter: a single character or `tab`.
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
    /// The first line is data, not column names.
    #[arg(long)]
    pub no_header: bool,
    /// Label column: a name, a zero-based index, or `last`.
    #[arg(long, default_value = "last")]
    pub label: LabelSelector,
    /// Schema override file; skips type inference.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Cell text treated as missing (repeatable; replaces the defaults).
    #[arg(long = "missing-token")]
    pub missing_tokens: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FormatArgs {
    /// Text drawn for missing cells.
    #[arg(long, default_value = DEFAULT_MISSING_TEXT)]
    pub missing_text: String,
    /// Draw the source token (e.g. `?`) for missing cells.
    #[arg(long)]
    pub keep_missing_token: bool,
    /// JSON `{column: {value: abbreviation}}`.
    #[arg(long)]
    pub abbrev: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ef,
    Vf,
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Ef)]
    pub mode: ModeArg,
    /// Canvas side in pixels.
    #[arg(long, default_value_t = 224)]
    pub size: u32,
    /// Margin in pixels; defaults to 2 px scaled from a 224 canvas.
    #[arg(long)]
    pub margin: Option<u32>,
    /// Importance scores: a JSON/CSV file or `builtin`.
    #[arg(long)]
    pub importance: Option<ImportanceChoice>,
    #[arg(long, value_enum)]
    pub importance_format: Option<ScoreFormat>,
    /// Comma-separated font sizes, largest first.
    #[arg(long, value_delimiter = ',')]
    pub tiers: Option<Vec<u32>>,
    /// Squared-word columns: `auto` (all categorical), `off`, or a list.
    #[arg(long, default_value = "auto")]
    pub sew: SewSelection,
    /// Keep the grid of this equal-font plan on the new canvas size.
    #[arg(long)]
    pub rescale_from: Option<PathBuf>,
}

fn parse_delimiter(s: &str) -> std::result::Result<u8, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be one ASCII character, got `{s}`")),
    }
}

impl InputArgs {
    fn read_options(&self) -> ReadOptions {
        ReadOptions {
            delimiter: self.delimiter,
            has_header: !self.no_header,
            label: self.label.clone(),
            missing_tokens: if self.missing_tokens.is_empty() {
                default_missing_tokens()
            } else {
                self.missing_tokens.iter().cloned().collect()
            },
        }
    }

    fn load(&self) -> Result<(TabularSchema, Vec<Sample>)> {
        let opts = self.read_options();
        let table = read_table(&self.input, &opts)?;
        let schema = match &self.schema {
            Some(path) => load_schema(path)?,
            None => infer_table_schema(&table, &opts)?,
        };
        if let Some(arity) = table.arity() {
            if arity != schema.arity() {
                return Err(Error::parse(
                    &self.input,
                    format!("table has {arity} columns, schema has {}", schema.arity()),
                ));
            }
        }
        let samples = schema.samples_from_records(&table.rows)?;
        Ok((schema, samples))
    }
}

impl FormatArgs {
    fn options(&self) -> Result<FormatOptions> {
        Ok(FormatOptions {
            missing_text: self.missing_text.clone(),
            preserve_missing_token: self.keep_missing_token,
            abbreviations: match &self.abbrev {
                Some(p) => load_abbreviations(p)?,
                None => Default::default(),
            },
            ..FormatOptions::default()
        })
    }
}

impl LayoutArgs {
    fn request(&self, samples: &[Sample], schema: &TabularSchema) -> Result<PlanRequest> {
        let importance = match (&self.importance, self.mode) {
            (Some(choice), _) => Some(resolve_importance(
                choice,
                self.importance_format,
                samples,
                schema,
            )?),
            (None, ModeArg::Vf) => {
                return Err(Error::Usage(
                    "--mode vf needs --importance FILE|builtin".into(),
                ))
            }
            (None, ModeArg::Ef) => None,
        };
        Ok(PlanRequest {
            mode: match self.mode {
                ModeArg::Ef => LayoutMode::EqualFont,
                ModeArg::Vf => LayoutMode::VariantFont,
            },
            side: self.size,
            margin: self.margin,
            tiers: self.tiers.clone(),
            sew: self.sew.clone(),
            importance,
            rescale_from: self.rescale_from.as_deref().map(read_plan).transpose()?,
        })
    }
}

fn emit_text(out: Option<&Path>, text: &[u8]) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => std::io::stdout()
            .write_all(text)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn run_validate(path: &Path, images: bool) -> Result<()> {
    let is_plan = path.is_file()
        && path.extension().and_then(|e| e.to_str()) == Some("json")
        && path.file_name().and_then(|n| n.to_str()) != Some(crate::emit::SIDECAR_FILE);
    if is_plan {
        let plan = read_plan(path)?;
        let violations = validate_plan(&plan);
        if !violations.is_empty() {
            return Err(Error::InvalidPlan(violations));
        }
        println!(
            "plan ok: {} cells on {} px",
            plan.cells.len(),
            plan.canvas.side
        );
        return Ok(());
    }
    let (manifest, warnings) = parse_manifest(path)?;
    let dir = crate::emit::manifest_dir(path);
    let plan = crate::emit::manifest_plan(path)?;
    let violations = validate_plan(&plan);
    if !violations.is_empty() {
        return Err(Error::InvalidPlan(violations));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if images {
        for e in &manifest.entries {
            let p = dir.join(&e.image_path);
            let Ok(bytes) = std::fs::read(&p) else {
                continue;
            };
            let image = decode_png(&bytes).map_err(|m| Error::parse(&p, m))?;
            if image.width() != plan.canvas.side || image.height() != plan.canvas.side {
                return Err(Error::Manifest {
                    path: p,
                    message: format!(
                        "image is {}x{}, plan canvas is {}",
                        image.width(),
                        image.height(),
                        plan.canvas.side
                    ),
                });
            }
        }
    }
    println!(
        "manifest ok: {} images, {} classes, {} warnings",
        manifest.entries.len(),
        manifest.labels().len(),
        warnings.len()
    );
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let font = GlyphFont::embedded();
    match cli.command {
        Command::Schema { input, out } => {
            let (schema, _) = input.load()?;
            emit_text(out.as_deref(), schema_to_json(&schema).as_bytes())
        }
        Command::Plan {
            input,
            format,
            layout,
            out,
        } => {
            let (schema, samples) = input.load()?;
            let opts = format.options()?;
            let request = layout.request(&samples, &schema)?;
            let plan = make_plan(&samples, &schema, &opts, &request, &font)?;
            emit_text(out.as_deref(), &plan_to_json(&plan))
        }
        Command::Convert(args) => {
            let (schema, samples) = args.input.load()?;
            let opts = args.format.options()?;
            opts.validate(&schema)?;
            opts.check_distinct(&schema, &samples)?;
            let plan = match &args.plan {
                Some(p) => read_plan(p)?,
                None => {
                    let request = args.layout.request(&samples, &schema)?;
                    make_plan(&samples, &schema, &opts, &request, &font)?
                }
            };
            let emit = EmitOptions {
                workers: args.workers,
                by_class_dirs: args.by_class_dirs,
            };
            match args.split {
                Some(ratio) => {
                    let m = emit_split(
                        &samples, &plan, &schema, &opts, &font, &args.out, &emit, ratio, args.seed,
                    )?;
                    eprintln!(
                        "wrote {} train and {} test images to {}",
                        m.train.entries.len(),
                        m.test.entries.len(),
                        args.out.display()
                    );
                }
                None => {
                    let m = emit_dataset(&samples, &plan, &schema, &opts, &font, &args.out, &emit)?;
                    eprintln!("wrote {} images to {}", m.entries.len(), args.out.display());
                }
            }
            Ok(())
        }
        Command::Validate { path, images } => run_validate(&path, images),
        Command::Importance { input, format, out } => {
            let (schema, samples) = input.load()?;
            let v = resolve_importance(&ImportanceChoice::Builtin, None, &samples, &schema)?;
            let text = match format {
                ScoreFormat::Json => importance_to_json(&v, &schema),
                ScoreFormat::Csv => importance_to_csv(&v, &schema),
            };
            emit_text(out.as_deref(), text.as_bytes())
        }
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::InvalidPlan(violations) = &e {
                for v in violations {
                    eprintln!("  {v:?}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
