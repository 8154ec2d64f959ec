//! File formats: dataset CSV, interventional-sample CSV, JSON documents,
//! and real counts-table ingestion.
//!
//! Datasets are CSV with one row per sample and columns
//! `z_1..z_q, x_1..x_p, y`, in exactly that order. Interventional samples
//! are CSV with columns `x_1..x_p`. Fits, ground truths, metric reports,
//! and experiment configurations travel as JSON. Floats are written in
//! shortest round-trip form, so writing and re-reading a file reproduces
//! the numbers bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::datagen::SimulationSpec;
use crate::error::{Error, Result};
use crate::iv::{IvDataset, Method};
use crate::simplex::{closure, Composition};

fn header_names(q: usize, p: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(q + p + 1);
    for k in 1..=q {
        names.push(format!("z_{k}"));
    }
    for j in 1..=p {
        names.push(format!("x_{j}"));
    }
    names.push("y".to_string());
    names
}

/// Writes a dataset as CSV with columns `z_1..z_q, x_1..x_p, y`.
pub fn write_dataset_csv(path: &Path, ds: &IvDataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header_names(ds.q(), ds.p()))?;
    let mut record = Vec::with_capacity(ds.q() + ds.p() + 1);
    for i in 0..ds.n() {
        record.clear();
        for k in 0..ds.q() {
            record.push(ds.z()[(i, k)].to_string());
        }
        for part in ds.x()[i].parts() {
            record.push(part.to_string());
        }
        record.push(ds.y()[i].to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_cell(raw: &str, row: usize, col: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| {
        Error::invalid(format!("row {row}, column {col}: {raw:?} is not a number"))
    })
}

/// Reads a dataset CSV written by [`write_dataset_csv`] (or shaped like it).
///
/// The header must be `z_1..z_q, x_1..x_p, y` in order. `pseudo_count` is
/// added to every treatment component before closure; pass 0 for data that
/// is already strictly positive.
pub fn read_dataset_csv(path: &Path, pseudo_count: f64) -> Result<IvDataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let q = header.iter().take_while(|h| h.starts_with("z_")).count();
    let p = header[q..].iter().take_while(|h| h.starts_with("x_")).count();
    if q == 0 || p < 2 || header != header_names(q, p) {
        return Err(Error::invalid(format!(
            "expected header z_1..z_q, x_1..x_p, y; got {}",
            header.join(",")
        )));
    }
    let mut z_rows: Vec<f64> = Vec::new();
    let mut xs: Vec<Composition> = Vec::new();
    let mut y: Vec<f64> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        if record.len() != q + p + 1 {
            return Err(Error::invalid(format!(
                "row {row} has {} fields, expected {}",
                record.len(),
                q + p + 1
            )));
        }
        for k in 0..q {
            z_rows.push(parse_cell(&record[k], row, &header[k])?);
        }
        let mut parts = Vec::with_capacity(p);
        for j in 0..p {
            parts.push(parse_cell(&record[q + j], row, &header[q + j])? + pseudo_count);
        }
        xs.push(closure(&parts)?);
        y.push(parse_cell(&record[q + p], row, "y")?);
    }
    let n = y.len();
    let z = DMatrix::from_row_slice(n, q, &z_rows);
    IvDataset::new(z, xs, DVector::from_vec(y))
}

/// Writes interventional samples as CSV with columns `x_1..x_p`.
pub fn write_compositions_csv(path: &Path, xs: &[Composition]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::invalid("no compositions to write"));
    }
    let p = xs[0].len();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((1..=p).map(|j| format!("x_{j}")))?;
    for x in xs {
        w.write_record(x.parts().iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a compositions CSV with columns `x_1..x_p`.
pub fn read_compositions_csv(path: &Path) -> Result<Vec<Composition>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let p = header.len();
    if p < 2 || header != (1..=p).map(|j| format!("x_{j}")).collect::<Vec<_>>() {
        return Err(Error::invalid(format!(
            "expected header x_1..x_p; got {}",
            header.join(",")
        )));
    }
    let mut xs = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let mut parts = Vec::with_capacity(p);
        for j in 0..p {
            parts.push(parse_cell(&record[j], idx + 1, &header[j])?);
        }
        xs.push(closure(&parts)?);
    }
    if xs.is_empty() {
        return Err(Error::invalid("compositions file has no rows"));
    }
    Ok(xs)
}

/// Serializes a value as pretty JSON, creating parent directories.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

/// Reads a JSON document.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Options for ingesting a real counts table.
#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Column holding the instrument (binary 0/1 accepted).
    pub instrument_col: String,
    /// Column holding the outcome.
    pub outcome_col: String,
    /// Threshold the outcome at its mean into -1 (at or below) / +1 (above).
    pub binary_outcome: bool,
    /// Added to every count before closure.
    pub pseudo_count: f64,
}

/// Reads a counts CSV into an IV dataset.
///
/// The file must have one row per sample: taxa count columns plus the named
/// instrument and outcome columns. Every remaining column is treated as a
/// taxon, in file order; no aggregation is performed, so aggregate to the
/// desired taxonomic level before ingesting. Counts get `pseudo_count`
/// added and are closed to compositions.
pub fn ingest_counts_csv(path: &Path, opts: &IngestOptions) -> Result<IvDataset> {
    if opts.instrument_col == opts.outcome_col {
        return Err(Error::invalid(
            "instrument and outcome columns must be distinct",
        ));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| -> Result<usize> {
        let hits: Vec<usize> = header
            .iter()
            .enumerate()
            .filter(|(_, h)| h.as_str() == name)
            .map(|(i, _)| i)
            .collect();
        match hits.as_slice() {
            [i] => Ok(*i),
            [] => Err(Error::invalid(format!("column {name:?} not found"))),
            _ => Err(Error::invalid(format!("column {name:?} appears more than once"))),
        }
    };
    let z_col = find(&opts.instrument_col)?;
    let y_col = find(&opts.outcome_col)?;
    let taxa: Vec<usize> = (0..header.len()).filter(|i| *i != z_col && *i != y_col).collect();
    if taxa.len() < 2 {
        return Err(Error::invalid("need at least two taxa columns"));
    }

    let mut z_vals = Vec::new();
    let mut y_vals = Vec::new();
    let mut xs = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        z_vals.push(parse_cell(&record[z_col], row, &header[z_col])?);
        y_vals.push(parse_cell(&record[y_col], row, &header[y_col])?);
        let mut counts = Vec::with_capacity(taxa.len());
        for &c in &taxa {
            let v = parse_cell(&record[c], row, &header[c])?;
            if v < 0.0 {
                return Err(Error::invalid(format!(
                    "row {row}, column {}: negative count {v}",
                    header[c]
                )));
            }
            counts.push(v);
        }
        if counts.iter().all(|v| *v == 0.0) {
            return Err(Error::degenerate(format!("row {row} has all-zero counts")));
        }
        for v in &mut counts {
            *v += opts.pseudo_count;
        }
        xs.push(closure(&counts)?);
    }
    if xs.is_empty() {
        return Err(Error::invalid("counts file has no data rows"));
    }
    if opts.binary_outcome {
        let mean = y_vals.iter().sum::<f64>() / y_vals.len() as f64;
        for v in &mut y_vals {
            *v = if *v > mean { 1.0 } else { -1.0 };
        }
    }
    let n = xs.len();
    let z = DMatrix::from_column_slice(n, 1, &z_vals);
    IvDataset::new(z, xs, DVector::from_vec(y_vals))
}

fn default_threshold() -> f64 {
    0.7
}

/// A benchmark experiment: scenarios, methods, seeds, and output paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenarios: Vec<ScenarioRef>,
    pub methods: Vec<Method>,
    /// Stability-selection threshold used by every `*-lc` method.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    pub n_seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub output: OutputPaths,
}

/// A scenario given as a preset name or inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Preset(String),
    Inline(InlineScenario),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineScenario {
    pub name: String,
    pub spec: SimulationSpec,
}

impl ScenarioRef {
    pub fn resolve(&self) -> Result<(String, SimulationSpec)> {
        match self {
            ScenarioRef::Preset(name) => Ok((name.clone(), crate::datagen::preset(name)?)),
            ScenarioRef::Inline(s) => Ok((s.name.clone(), s.spec.clone())),
        }
    }
}

/// Where a benchmark writes its outputs; all optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    /// Summary table CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Aligned-text summary table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<PathBuf>,
    /// Raw per-seed records, one JSON object per line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jsonl: Option<PathBuf>,
}
