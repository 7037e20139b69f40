//! JSON/CSV side files: plans, importance scores, abbreviation tables, and
//! PNG encoding.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use sha2::{Digest, Sha256};
use supertml_core::format::AbbreviationMap;
use supertml_core::importance::{ImportanceSource, ImportanceVector};
use supertml_core::layout::LayoutPlan;
use supertml_core::render::RasterImage;
use supertml_core::schema::TabularSchema;

use crate::error::{Error, Result};

/// `sha256:<hex>` of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

pub fn plan_to_json(plan: &LayoutPlan) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(plan).expect("plan serializes");
    bytes.push(b'\n');
    bytes
}

pub fn read_plan(path: &Path) -> Result<LayoutPlan> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::parse(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScoreFormat {
    Json,
    Csv,
}

impl ScoreFormat {
    pub fn from_extension(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ScoreFormat::Csv,
            _ => ScoreFormat::Json,
        }
    }
}

fn read_score_pairs(path: &Path, format: ScoreFormat) -> Result<Vec<(String, f64)>> {
    match format {
        ScoreFormat::Json => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            let map: serde_json::Map<String, serde_json::Value> =
                serde_json::from_reader(file).map_err(|e| Error::parse(path, e))?;
            map.into_iter()
                .map(|(k, v)| match v.as_f64() {
                    Some(x) => Ok((k, x)),
                    None => Err(Error::parse(
                        path,
                        format!("score for `{k}` is not a number"),
                    )),
                })
                .collect()
        }
        ScoreFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .from_path(path)
                .map_err(|e| Error::parse(path, e))?;
            let mut pairs = Vec::new();
            for (i, record) in reader.records().enumerate() {
                let record = record.map_err(|e| Error::parse(path, e))?;
                if record.len() != 2 {
                    return Err(Error::parse(
                        path,
                        format!("row {}: expected 2 columns", i + 1),
                    ));
                }
                let name = record[0].trim().to_string();
                match record[1].trim().parse::<f64>() {
                    Ok(x) => pairs.push((name, x)),
                    // A non-numeric first row is a header.
                    Err(_) if i == 0 => {}
                    Err(_) => {
                        return Err(Error::parse(
                            path,
                            format!("row {}: `{}` is not a number", i + 1, &record[1]),
                        ))
                    }
                }
            }
            Ok(pairs)
        }
    }
}

/// Loads `{feature: score}` from JSON or a two-column CSV and orders it by
/// the schema's feature columns.
pub fn load_importance(
    path: &Path,
    schema: &TabularSchema,
    format: ScoreFormat,
) -> Result<ImportanceVector> {
    let pairs = read_score_pairs(path, format)?;
    Ok(ImportanceVector::from_named(
        pairs,
        schema,
        ImportanceSource::External(path.display().to_string()),
    )?)
}

pub fn importance_to_json(v: &ImportanceVector, schema: &TabularSchema) -> String {
    let map: serde_json::Map<String, serde_json::Value> = schema
        .features()
        .zip(&v.scores)
        .map(|(c, s)| (c.name.clone(), serde_json::json!(s)))
        .collect();
    let mut s = serde_json::to_string_pretty(&map).expect("scores serialize");
    s.push('\n');
    s
}

pub fn importance_to_csv(v: &ImportanceVector, schema: &TabularSchema) -> String {
    let mut out = String::from("feature,score\n");
    for (c, s) in schema.features().zip(&v.scores) {
        out.push_str(&format!("{},{}\n", c.name, s));
    }
    out
}

pub fn load_abbreviations(path: &Path) -> Result<AbbreviationMap> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(file).map_err(|e| Error::parse(path, e))
}

/// Grayscale PNG with fixed encoder settings: one filter type, one deflate
/// level, no ancillary chunks.
pub fn encode_png(image: &RasterImage) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut encoder =
            png::Encoder::new(BufWriter::new(&mut out), image.width(), image.height());
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_deflate_compression(png::DeflateCompression::Level(6));
        encoder.set_filter(png::Filter::Up);
        let mut writer = encoder.write_header().expect("in-memory write");
        writer
            .write_image_data(image.pixels())
            .expect("in-memory write");
        writer.finish().expect("in-memory write");
    }
    out
}

pub fn decode_png(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or("image too large")?];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(format!(
            "unsupported {:?} {:?}",
            info.color_type, info.bit_depth
        ));
    }
    buf.truncate(info.buffer_size());
    RasterImage::from_pixels(info.width, info.height, buf).ok_or_else(|| "size mismatch".into())
}
