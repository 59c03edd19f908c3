//! Data model, block-extrema extraction, CSV ingestion, and model
//! persistence.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::{EnsembleConfig, EnsembleError, EnsembleModel};
use crate::gev::GevParams;
use crate::tree::{Split, SplitRule, TreeNode};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("header does not match the expected schema: {0}")]
    SchemaMismatch(String),
    #[error("unparsable value at line {line}: {message}")]
    ParseError { line: u64, message: String },
    #[error("rows have mismatched lengths or non-finite values: {0}")]
    InvalidDataset(String),
    #[error("timestamps must be strictly increasing")]
    NonMonotonicTimestamps,
    #[error("time series is empty")]
    EmptySeries,
    #[error("unsupported model file version {0} (expected 1)")]
    VersionMismatch(u64),
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("covariate dimensionality {got} does not match model schema {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Covariate matrix paired with block-extrema targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    column_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
        column_names: Vec<String>,
    ) -> Result<Self, DataError> {
        if rows.len() != targets.len() {
            return Err(DataError::InvalidDataset(format!(
                "{} covariate rows vs {} targets",
                rows.len(),
                targets.len()
            )));
        }
        let dims = column_names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dims {
                return Err(DataError::InvalidDataset(format!(
                    "row {i} has {} columns, expected {dims}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(DataError::InvalidDataset(format!("row {i} has non-finite covariate")));
            }
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(DataError::InvalidDataset("non-finite target".into()));
        }
        Ok(Dataset { rows, targets, column_names })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_dims(&self) -> usize {
        self.column_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// New dataset holding the given rows (bootstrap support).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            column_names: self.column_names.clone(),
        }
    }
}

/// Strictly increasing instants with one observation each.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub timestamps: Vec<DateTime<Utc>>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(timestamps: Vec<DateTime<Utc>>, values: Vec<f64>) -> Result<Self, DataError> {
        if timestamps.len() != values.len() {
            return Err(DataError::InvalidDataset("timestamp/value length mismatch".into()));
        }
        if timestamps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DataError::NonMonotonicTimestamps);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DataError::InvalidDataset("non-finite observation".into()));
        }
        Ok(TimeSeries { timestamps, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockMode {
    Max,
    Min,
}

/// Non-overlapping aligned blocks over which extrema are taken.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub block_length: Duration,
    /// Offset of the block origin from the UTC epoch midnight.
    pub alignment: Duration,
    pub mode: BlockMode,
    /// Blocks with fewer observations than this are dropped and reported.
    pub min_observations: usize,
}

impl BlockSpec {
    pub fn daily(mode: BlockMode) -> Self {
        BlockSpec {
            block_length: Duration::days(1),
            alignment: Duration::zero(),
            mode,
            min_observations: 12,
        }
    }
}

/// Result of block extraction: block start instants, their extrema, and a
/// report of dropped incomplete blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockExtrema {
    pub starts: Vec<DateTime<Utc>>,
    pub values: Vec<f64>,
    /// (block start, observation count) for each dropped block.
    pub dropped: Vec<(DateTime<Utc>, usize)>,
}

/// Per-block extrema of a high-resolution series over non-overlapping
/// aligned blocks.
pub fn extract_block_extrema(
    series: &TimeSeries,
    spec: &BlockSpec,
) -> Result<BlockExtrema, DataError> {
    if series.is_empty() {
        return Err(DataError::EmptySeries);
    }
    let block_ms = spec.block_length.num_milliseconds();
    if block_ms <= 0 {
        return Err(DataError::InvalidDataset("block length must be positive".into()));
    }
    let align_ms = spec.alignment.num_milliseconds();

    let mut starts = Vec::new();
    let mut values = Vec::new();
    let mut dropped = Vec::new();
    let mut current: Option<(i64, f64, usize)> = None; // (block index, extremum, count)

    let mut flush = |block: i64, extremum: f64, count: usize| {
        let start_ms = block * block_ms + align_ms;
        let start = DateTime::from_timestamp_millis(start_ms).expect("in-range timestamp");
        if count >= spec.min_observations {
            starts.push(start);
            values.push(extremum);
        } else {
            dropped.push((start, count));
        }
    };

    for (t, &v) in series.timestamps.iter().zip(&series.values) {
        let block = (t.timestamp_millis() - align_ms).div_euclid(block_ms);
        match current {
            Some((b, ext, count)) if b == block => {
                let ext = match spec.mode {
                    BlockMode::Max => ext.max(v),
                    BlockMode::Min => ext.min(v),
                };
                current = Some((b, ext, count + 1));
            }
            Some((b, ext, count)) => {
                flush(b, ext, count);
                current = Some((block, v, 1));
            }
            None => current = Some((block, v, 1)),
        }
    }
    if let Some((b, ext, count)) = current {
        flush(b, ext, count);
    }
    Ok(BlockExtrema { starts, values, dropped })
}

fn open_reader(path: &Path) -> Result<csv::Reader<BufReader<File>>, DataError> {
    let file = File::open(path)
        .map_err(|_| DataError::FileNotFound(path.display().to_string()))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file)))
}

fn parse_instant(s: &str, line: u64) -> Result<DateTime<Utc>, DataError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| DataError::ParseError { line, message: format!("timestamp {s:?}: {e}") })
}

fn parse_number(s: &str, line: u64) -> Result<f64, DataError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| DataError::ParseError { line, message: format!("value {s:?}: {e}") })?;
    if !v.is_finite() {
        return Err(DataError::ParseError { line, message: format!("non-finite value {s:?}") });
    }
    Ok(v)
}

/// Sub-interval observations: header `timestamp,value`, ISO-8601 UTC
/// timestamps.
pub fn load_observations_csv(path: &Path) -> Result<TimeSeries, DataError> {
    let mut reader = open_reader(path)?;
    let headers = reader.headers().map_err(|e| DataError::SchemaMismatch(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["timestamp", "value"] {
        return Err(DataError::SchemaMismatch(format!(
            "expected header 'timestamp,value', got {:?}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::SchemaMismatch(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        timestamps.push(parse_instant(&record[0], line)?);
        values.push(parse_number(&record[1], line)?);
    }
    TimeSeries::new(timestamps, values)
}

/// Covariate–peak training rows: header `block_start,<covariates...>,peak`.
#[derive(Debug, Clone)]
pub struct TrainingData {
    pub block_starts: Vec<DateTime<Utc>>,
    pub dataset: Dataset,
}

pub fn load_training_csv(path: &Path) -> Result<TrainingData, DataError> {
    let mut reader = open_reader(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DataError::SchemaMismatch(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.len() < 3 || headers[0] != "block_start" || headers.last().map(String::as_str) != Some("peak") {
        return Err(DataError::SchemaMismatch(
            "expected header 'block_start,<covariates...>,peak'".into(),
        ));
    }
    let column_names = headers[1..headers.len() - 1].to_vec();
    let mut block_starts = Vec::new();
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::SchemaMismatch(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != headers.len() {
            return Err(DataError::ParseError {
                line,
                message: format!("expected {} fields, got {}", headers.len(), record.len()),
            });
        }
        block_starts.push(parse_instant(&record[0], line)?);
        let mut row = Vec::with_capacity(column_names.len());
        for field in record.iter().skip(1).take(column_names.len()) {
            row.push(parse_number(field, line)?);
        }
        rows.push(row);
        targets.push(parse_number(&record[record.len() - 1], line)?);
    }
    Ok(TrainingData {
        block_starts,
        dataset: Dataset::new(rows, targets, column_names)?,
    })
}

/// Covariate rows for prediction: header `timestamp,<covariates...>`.
#[derive(Debug, Clone)]
pub struct CovariateData {
    pub timestamps: Vec<DateTime<Utc>>,
    pub rows: Vec<Vec<f64>>,
    pub column_names: Vec<String>,
}

pub fn load_covariates_csv(path: &Path) -> Result<CovariateData, DataError> {
    let mut reader = open_reader(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DataError::SchemaMismatch(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.len() < 2 || headers[0] != "timestamp" {
        return Err(DataError::SchemaMismatch(
            "expected header 'timestamp,<covariates...>'".into(),
        ));
    }
    let column_names = headers[1..].to_vec();
    let mut timestamps = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::SchemaMismatch(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != headers.len() {
            return Err(DataError::ParseError {
                line,
                message: format!("expected {} fields, got {}", headers.len(), record.len()),
            });
        }
        timestamps.push(parse_instant(&record[0], line)?);
        let mut row = Vec::with_capacity(column_names.len());
        for field in record.iter().skip(1) {
            row.push(parse_number(field, line)?);
        }
        rows.push(row);
    }
    Ok(CovariateData { timestamps, rows, column_names })
}

// --- model persistence -----------------------------------------------------

pub const MODEL_FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u64,
    config: EnsembleConfig,
    schema: Vec<String>,
    members: Vec<NodeFile>,
}

#[derive(Serialize, Deserialize)]
struct NodeFile {
    rule: Option<RuleFile>,
    params: ParamsFile,
    children: Option<Box<[NodeFile; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct RuleFile {
    dim: usize,
    threshold: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    mu: f64,
    sigma: f64,
    xi: f64,
}

fn node_to_file(node: &TreeNode) -> NodeFile {
    NodeFile {
        rule: node.split.as_ref().map(|s| RuleFile {
            dim: s.rule.dim,
            threshold: s.rule.threshold,
        }),
        params: ParamsFile {
            mu: node.params.mu,
            sigma: node.params.sigma,
            xi: node.params.xi,
        },
        children: node
            .split
            .as_ref()
            .map(|s| Box::new([node_to_file(&s.left), node_to_file(&s.right)])),
    }
}

fn node_from_file(file: NodeFile) -> Result<TreeNode, DataError> {
    let params = GevParams::new(file.params.mu, file.params.sigma, file.params.xi)
        .map_err(|e| DataError::CorruptModel(e.to_string()))?;
    let split = match (file.rule, file.children) {
        (Some(rule), Some(children)) => {
            let [left, right] = *children;
            Some(Split {
                rule: SplitRule { dim: rule.dim, threshold: rule.threshold },
                left: Box::new(node_from_file(left)?),
                right: Box::new(node_from_file(right)?),
            })
        }
        (None, None) => None,
        _ => {
            return Err(DataError::CorruptModel(
                "rule and children must be present together".into(),
            ))
        }
    };
    // Fitting-time bookkeeping (partition size, score total) is not part of
    // the persisted schema; predictions do not depend on it.
    Ok(TreeNode { params, log_score_total: 0.0, size: 0, split })
}

/// Persist a fitted ensemble as a versioned, self-describing JSON document.
pub fn save_model(model: &EnsembleModel, path: &Path) -> Result<(), DataError> {
    let file = ModelFile {
        version: MODEL_FORMAT_VERSION,
        config: model.config.clone(),
        schema: model.covariate_schema.clone(),
        members: model.members.iter().map(node_to_file).collect(),
    };
    let out = File::create(path)?;
    let mut writer = BufWriter::new(out);
    serde_json::to_writer(&mut writer, &file)
        .map_err(|e| DataError::CorruptModel(e.to_string()))?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// Load a persisted ensemble; the round trip preserves predictions exactly.
pub fn load_model(path: &Path) -> Result<EnsembleModel, DataError> {
    let file = File::open(path)
        .map_err(|_| DataError::FileNotFound(path.display().to_string()))?;
    // Peek the version before strict decoding so a bump is reported as
    // VersionMismatch rather than a generic parse failure.
    let value: serde_json::Value = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| DataError::CorruptModel(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| DataError::CorruptModel("missing version field".into()))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(DataError::VersionMismatch(version));
    }
    let parsed: ModelFile = serde_json::from_value(value)
        .map_err(|e| DataError::CorruptModel(e.to_string()))?;
    if parsed.members.is_empty() {
        return Err(DataError::CorruptModel("model has no members".into()));
    }
    let members = parsed
        .members
        .into_iter()
        .map(node_from_file)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleModel {
        members,
        config: parsed.config,
        covariate_schema: parsed.schema,
    })
}

/// Residuals r_n = E[GEV(θ̂|x_n)] − y_n; +∞ where the predicted tail mean
/// diverges (ξ̂ ≥ 1).
pub fn residuals(model: &EnsembleModel, data: &Dataset) -> Result<Vec<f64>, EnsembleError> {
    (0..data.n_rows())
        .map(|i| {
            let params = model.predict(data.row(i))?;
            Ok(params.mean() - data.target(i))
        })
        .collect()
}
