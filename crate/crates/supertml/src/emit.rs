//! Image dataset emission and the manifest format.
//!
//! An output directory holds one PNG per sample, `plan.json`,
//! `manifest.tsv` (`image_path`, `label`, `row_index`, `source_row`) and
//! `manifest.json` with the digests that tie them together.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use supertml_core::font::GlyphFont;
use supertml_core::format::FormatOptions;
use supertml_core::layout::{validate_plan, LayoutError, LayoutPlan};
use supertml_core::render::render_sample;
use supertml_core::schema::{Sample, TabularSchema};

use crate::error::{Error, Result};
use crate::files::{digest, encode_png, plan_to_json, read_plan};

pub const PLAN_FILE: &str = "plan.json";
pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const SIDECAR_FILE: &str = "manifest.json";
pub const MANIFEST_HEADER: &str = "image_path\tlabel\trow_index\tsource_row";
const SIDECAR_VERSION: u32 = 1;

/// Replaces every non-alphanumeric character with `-`. The empty label
/// becomes `-`.
pub fn sanitize_label(label: &str) -> String {
    if label.is_empty() {
        return "-".to_string();
    }
    label
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '-' })
        .collect()
}

pub fn image_file_name(sanitized: &str, row_index: usize) -> String {
    format!("{sanitized}_{row_index:05}.png")
}

/// Splits `Sunny_00000.png` into `("Sunny", 0)`.
pub fn parse_image_file_name(name: &str) -> Option<(&str, usize)> {
    let stem = name.strip_suffix(".png")?;
    let (label, index) = stem.rsplit_once('_')?;
    if index.len() < 5 || !index.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((label, index.parse().ok()?))
}

/// Sanitized form of every distinct label, failing on collisions.
pub fn sanitize_labels<'a, I>(labels: I) -> Result<BTreeMap<String, String>>
where
    I: IntoIterator<Item = &'a str>,
{
    let distinct: BTreeSet<&str> = labels.into_iter().collect();
    let mut by_sanitized: BTreeMap<String, &str> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for label in distinct {
        if label.contains(['\t', '\n', '\r']) {
            return Err(Error::Usage(format!(
                "label {label:?} contains a tab or line break"
            )));
        }
        let sanitized = sanitize_label(label);
        if let Some(first) = by_sanitized.insert(sanitized.clone(), label) {
            return Err(Error::LabelCollision {
                first: first.to_string(),
                second: label.to_string(),
                sanitized,
            });
        }
        out.insert(label.to_string(), sanitized);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory, `/`-separated.
    pub image_path: String,
    pub label: String,
    pub row_index: usize,
    /// Zero-based data row in the source table.
    pub source_row: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub plan_digest: String,
    pub config_digest: String,
}

impl DatasetManifest {
    pub fn labels(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.label.as_str()).or_insert(0) += 1;
        }
        counts
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(MANIFEST_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                e.image_path, e.label, e.row_index, e.source_row
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Sidecar {
    version: u32,
    images: usize,
    plan_digest: String,
    config_digest: String,
    manifest_digest: String,
}

#[derive(Serialize)]
struct ConfigRef<'a> {
    schema: &'a TabularSchema,
    format: &'a FormatOptions,
}

pub fn config_digest(schema: &TabularSchema, opts: &FormatOptions) -> String {
    let bytes = serde_json::to_vec(&ConfigRef {
        schema,
        format: opts,
    })
    .expect("config serializes");
    digest(&bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitOptions {
    /// Render threads; 0 uses one per core.
    pub workers: usize,
    /// Put each image under a directory named after its sanitized label.
    pub by_class_dirs: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            workers: 1,
            by_class_dirs: false,
        }
    }
}

/// Train/test proportions, e.g. `80:20`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRatio {
    pub train: u32,
    pub test: u32,
}

impl std::str::FromStr for SplitRatio {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected TRAIN:TEST, got `{s}`"))?;
        let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("`{x}`: {e}"));
        let (train, test) = (parse(a)?, parse(b)?);
        if train == 0 && test == 0 {
            return Err("split ratio must not be 0:0".into());
        }
        Ok(SplitRatio { train, test })
    }
}

impl SplitRatio {
    /// Source row indices of the train and test parts, each in source order.
    pub fn assign(&self, n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
        let total = u64::from(self.train) + u64::from(self.test);
        let n_train = ((n as u64 * u64::from(self.train) * 2 + total) / (2 * total)) as usize;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (train, test) = order.split_at(n_train);
        let (mut train, mut test) = (train.to_vec(), test.to_vec());
        train.sort_unstable();
        test.sort_unstable();
        (train, test)
    }
}

/// Paths created by an emission, removed again if it fails.
struct Created {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    armed: bool,
}

impl Created {
    fn new() -> Self {
        Created {
            files: Vec::new(),
            dirs: Vec::new(),
            armed: true,
        }
    }

    fn create_dir(&mut self, dir: &Path) -> Result<()> {
        let mut missing = Vec::new();
        let mut cur = Some(dir);
        while let Some(d) = cur {
            if d.as_os_str().is_empty() || d.exists() {
                break;
            }
            missing.push(d.to_path_buf());
            cur = d.parent();
        }
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.dirs.extend(missing.into_iter().rev());
        Ok(())
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        self.files.push(path.to_path_buf());
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    fn disarm(mut self) {
        self.armed = false;
    }
}

impl Drop for Created {
    fn drop(&mut self) {
        if !self.armed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

fn check_output_dir(out_dir: &Path) -> Result<()> {
    match fs::read_dir(out_dir) {
        Ok(mut entries) => {
            if entries.next().is_some() {
                return Err(Error::Usage(format!(
                    "output directory {} is not empty",
                    out_dir.display()
                )));
            }
            Ok(())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(Error::io(out_dir, e)),
    }
}

fn check_plan(plan: &LayoutPlan, schema: &TabularSchema) -> Result<()> {
    let violations = validate_plan(plan);
    if !violations.is_empty() {
        return Err(Error::InvalidPlan(violations));
    }
    if plan.n_features() != schema.n_features() {
        return Err(LayoutError::Arity {
            expected: schema.n_features(),
            found: plan.n_features(),
        }
        .into());
    }
    Ok(())
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {workers} workers: {e}")))
}

struct Job<'a> {
    plan: &'a LayoutPlan,
    plan_json: &'a [u8],
    schema: &'a TabularSchema,
    opts: &'a FormatOptions,
    font: &'a GlyphFont,
    sanitized: &'a BTreeMap<String, String>,
    emit: &'a EmitOptions,
}

impl Job<'_> {
    /// Writes one manifest directory for the given source rows.
    fn run(
        &self,
        samples: &[Sample],
        rows: &[usize],
        out_dir: &Path,
        pool: &rayon::ThreadPool,
        created: &mut Created,
    ) -> Result<DatasetManifest> {
        created.create_dir(out_dir)?;
        let entries: Vec<ManifestEntry> = rows
            .iter()
            .enumerate()
            .map(|(row_index, &source_row)| {
                let label = samples[source_row].label.clone();
                let sanitized = &self.sanitized[&label];
                let name = image_file_name(sanitized, row_index);
                let image_path = if self.emit.by_class_dirs {
                    format!("{sanitized}/{name}")
                } else {
                    name
                };
                ManifestEntry {
                    image_path,
                    label,
                    row_index,
                    source_row,
                }
            })
            .collect();
        if self.emit.by_class_dirs {
            let classes: BTreeSet<&String> = self.sanitized.values().collect();
            for class in classes {
                created.create_dir(&out_dir.join(class))?;
            }
        }
        // Files are registered before the pool runs so a failure removes
        // whatever any worker managed to write.
        created
            .files
            .extend(entries.iter().map(|e| out_dir.join(&e.image_path)));

        let results: Vec<Result<()>> = pool.install(|| {
            entries
                .par_iter()
                .map(|e| {
                    let sample = &samples[e.source_row];
                    let image = render_sample(sample, self.plan, self.schema, self.opts, self.font)
                        .map_err(|source| Error::Render {
                            row: e.source_row + 1,
                            source,
                        })?;
                    let path = out_dir.join(&e.image_path);
                    fs::write(&path, encode_png(&image)).map_err(|err| Error::io(path, err))
                })
                .collect()
        });
        // The lowest failing row wins so the reported error does not depend
        // on scheduling.
        results.into_iter().collect::<Result<()>>()?;

        let manifest = DatasetManifest {
            entries,
            plan_digest: digest(self.plan_json),
            config_digest: config_digest(self.schema, self.opts),
        };
        let tsv = manifest.to_tsv();
        let sidecar = Sidecar {
            version: SIDECAR_VERSION,
            images: manifest.entries.len(),
            plan_digest: manifest.plan_digest.clone(),
            config_digest: manifest.config_digest.clone(),
            manifest_digest: digest(tsv.as_bytes()),
        };
        let mut sidecar_json = serde_json::to_vec_pretty(&sidecar).expect("sidecar serializes");
        sidecar_json.push(b'\n');
        created.write(&out_dir.join(PLAN_FILE), self.plan_json)?;
        created.write(&out_dir.join(MANIFEST_FILE), tsv.as_bytes())?;
        created.write(&out_dir.join(SIDECAR_FILE), &sidecar_json)?;
        Ok(manifest)
    }
}

/// Renders every sample into `out_dir`, which must be empty or absent.
///
/// Images are named `<sanitized label>_<row index>.png` with row indices in
/// source order. On any failure everything this call created is removed.
#[allow(clippy::too_many_arguments)]
pub fn emit_dataset(
    samples: &[Sample],
    plan: &LayoutPlan,
    schema: &TabularSchema,
    opts: &FormatOptions,
    font: &GlyphFont,
    out_dir: &Path,
    emit: &EmitOptions,
) -> Result<DatasetManifest> {
    check_plan(plan, schema)?;
    check_output_dir(out_dir)?;
    let sanitized = sanitize_labels(samples.iter().map(|s| s.label.as_str()))?;
    let pool = thread_pool(emit.workers)?;
    let plan_json = plan_to_json(plan);
    let job = Job {
        plan,
        plan_json: &plan_json,
        schema,
        opts,
        font,
        sanitized: &sanitized,
        emit,
    };
    let rows: Vec<usize> = (0..samples.len()).collect();
    let mut created = Created::new();
    let manifest = job.run(samples, &rows, out_dir, &pool, &mut created)?;
    created.disarm();
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitManifests {
    pub train: DatasetManifest,
    pub test: DatasetManifest,
}

/// Like [`emit_dataset`], but writes a seeded random split into
/// `out_dir/train` and `out_dir/test`.
#[allow(clippy::too_many_arguments)]
pub fn emit_split(
    samples: &[Sample],
    plan: &LayoutPlan,
    schema: &TabularSchema,
    opts: &FormatOptions,
    font: &GlyphFont,
    out_dir: &Path,
    emit: &EmitOptions,
    ratio: SplitRatio,
    seed: u64,
) -> Result<SplitManifests> {
    check_plan(plan, schema)?;
    check_output_dir(out_dir)?;
    let sanitized = sanitize_labels(samples.iter().map(|s| s.label.as_str()))?;
    let pool = thread_pool(emit.workers)?;
    let plan_json = plan_to_json(plan);
    let job = Job {
        plan,
        plan_json: &plan_json,
        schema,
        opts,
        font,
        sanitized: &sanitized,
        emit,
    };
    let (train_rows, test_rows) = ratio.assign(samples.len(), seed);
    let mut created = Created::new();
    created.create_dir(out_dir)?;
    let train = job.run(
        samples,
        &train_rows,
        &out_dir.join("train"),
        &pool,
        &mut created,
    )?;
    let test = job.run(
        samples,
        &test_rows,
        &out_dir.join("test"),
        &pool,
        &mut created,
    )?;
    created.disarm();
    Ok(SplitManifests { train, test })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ManifestWarning {
    MissingImage(String),
}

impl std::fmt::Display for ManifestWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ManifestWarning::MissingImage(p) => write!(f, "image {p} is missing"),
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Accepts either the manifest file or the directory holding it.
pub fn manifest_dir(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.to_path_buf()
    } else {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    }
}

/// Reads a manifest written by [`emit_dataset`], checking its digests
/// against the sidecar and the co-located plan file.
///
/// Images that are not on disk are reported as warnings, not errors.
pub fn parse_manifest(path: &Path) -> Result<(DatasetManifest, Vec<ManifestWarning>)> {
    let dir = manifest_dir(path);
    let tsv_path = dir.join(MANIFEST_FILE);
    let sidecar_path = dir.join(SIDECAR_FILE);
    let plan_path = dir.join(PLAN_FILE);

    let tsv = read_to_string(&tsv_path)?;
    let sidecar: Sidecar = serde_json::from_str(&read_to_string(&sidecar_path)?)
        .map_err(|e| Error::parse(&sidecar_path, e))?;
    if sidecar.version != SIDECAR_VERSION {
        return Err(Error::Manifest {
            path: sidecar_path,
            message: format!("unsupported version {}", sidecar.version),
        });
    }
    let found = digest(tsv.as_bytes());
    if found != sidecar.manifest_digest {
        return Err(Error::Integrity {
            path: tsv_path,
            expected: sidecar.manifest_digest,
            found,
        });
    }
    let plan_bytes = fs::read(&plan_path).map_err(|e| Error::io(&plan_path, e))?;
    let found = digest(&plan_bytes);
    if found != sidecar.plan_digest {
        return Err(Error::Integrity {
            path: plan_path,
            expected: sidecar.plan_digest,
            found,
        });
    }

    let bad = |line: usize, message: String| Error::Manifest {
        path: tsv_path.clone(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = tsv.lines();
    if lines.next() != Some(MANIFEST_HEADER) {
        return Err(bad(1, "unexpected header".into()));
    }
    let mut entries = Vec::new();
    let mut paths = BTreeSet::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let fields: Vec<&str> = line.split('\t').collect();
        let [image_path, label, row_index, source_row] = fields[..] else {
            return Err(bad(n, format!("expected 4 fields, found {}", fields.len())));
        };
        let number = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| bad(n, format!("`{s}`: {e}")))
        };
        let entry = ManifestEntry {
            image_path: image_path.to_string(),
            label: label.to_string(),
            row_index: number(row_index)?,
            source_row: number(source_row)?,
        };
        if entry.row_index != i {
            return Err(bad(
                n,
                format!("row_index {} out of sequence", entry.row_index),
            ));
        }
        if !paths.insert(entry.image_path.clone()) {
            return Err(bad(n, format!("duplicate image path {}", entry.image_path)));
        }
        let file_name = entry.image_path.rsplit('/').next().unwrap_or_default();
        match parse_image_file_name(file_name) {
            Some((stem, index))
                if stem == sanitize_label(&entry.label) && index == entry.row_index => {}
            _ => {
                return Err(bad(
                    n,
                    format!(
                        "file name {} does not encode label and index",
                        entry.image_path
                    ),
                ))
            }
        }
        entries.push(entry);
    }
    if entries.len() != sidecar.images {
        return Err(Error::Manifest {
            path: sidecar_path,
            message: format!(
                "expected {} images, manifest lists {}",
                sidecar.images,
                entries.len()
            ),
        });
    }
    let warnings = entries
        .iter()
        .filter(|e| !dir.join(&e.image_path).is_file())
        .map(|e| ManifestWarning::MissingImage(e.image_path.clone()))
        .collect();
    Ok((
        DatasetManifest {
            entries,
            plan_digest: sidecar.plan_digest,
            config_digest: sidecar.config_digest,
        },
        warnings,
    ))
}

/// The plan stored next to a manifest.
pub fn manifest_plan(path: &Path) -> Result<LayoutPlan> {
    read_plan(&manifest_dir(path).join(PLAN_FILE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sanitization() {
        assert_eq!(sanitize_label("Sunny"), "Sunny");
        assert_eq!(sanitize_label("Iris-setosa"), "Iris-setosa");
        assert_eq!(sanitize_label("<=50K"), "--50K");
        assert_eq!(sanitize_label(">50K"), "-50K");
        assert_eq!(sanitize_label(""), "-");
        assert_eq!(sanitize_label("a b/c"), "a-b-c");
    }

    #[test]
    fn collisions_are_errors() {
        assert!(sanitize_labels(["a b", "a-b"]).is_err());
        assert!(sanitize_labels(["<=50K", ">50K"]).is_ok());
        let m = sanitize_labels(["x", "x", "y"]).unwrap();
        assert_eq!(m.len(), 2);
        assert!(matches!(sanitize_labels(["a\tb"]), Err(Error::Usage(_))));
    }

    #[test]
    fn file_names() {
        assert_eq!(image_file_name("Sunny", 0), "Sunny_00000.png");
        assert_eq!(image_file_name("x", 123456), "x_123456.png");
        assert_eq!(parse_image_file_name("Sunny_00000.png"), Some(("Sunny", 0)));
        assert_eq!(parse_image_file_name("a_b_00012.png"), Some(("a_b", 12)));
        assert_eq!(parse_image_file_name("a_12.png"), None);
        assert_eq!(parse_image_file_name("a_00012.jpg"), None);
    }

    #[test]
    fn split_is_seeded_and_partitions() {
        let r: SplitRatio = "80:20".parse().unwrap();
        let (train, test) = r.assign(150, 7);
        assert_eq!((train.len(), test.len()), (120, 30));
        assert_eq!(r.assign(150, 7), (train.clone(), test.clone()));
        assert_ne!(r.assign(150, 8).0, train);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..150).collect::<Vec<_>>());
        assert!("80".parse::<SplitRatio>().is_err());
        assert!("0:0".parse::<SplitRatio>().is_err());
        let all_train: SplitRatio = "1:0".parse().unwrap();
        assert_eq!(all_train.assign(5, 1).1, Vec::<usize>::new());
    }
}
