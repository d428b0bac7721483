//! CSV ingestion for flow features: named feature columns, an optional label
//! column, and a documented drop rule for unusable rows.

use super::{FlowFeatures, Label};
use crate::error::IdsError;
use std::path::Path;

/// Maps CSV columns to feature slots. Feature order here is the feature
/// order of the resulting vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub feature_columns: Vec<String>,
    pub label_column: Option<String>,
}

/// Ingestion result: parsed rows plus how many were dropped for non-finite
/// or unparseable values in mapped columns.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestReport {
    pub rows: Vec<FlowFeatures>,
    pub dropped: usize,
}

/// A label cell reading "benign" (any case) maps to benign; anything else is
/// malicious.
pub fn parse_label(cell: &str) -> Label {
    if cell.trim().eq_ignore_ascii_case("benign") {
        Label::Benign
    } else {
        Label::Malicious
    }
}

/// Read flows from a headered CSV. Rows whose mapped cells fail to parse as
/// finite numbers are dropped and counted, never silently skipped.
pub fn ingest_flows(path: &Path, schema: &CsvSchema) -> Result<IngestReport, IdsError> {
    let file = std::fs::File::open(path)?;
    ingest_flows_from_reader(file, schema)
}

pub fn ingest_flows_from_reader<R: std::io::Read>(
    reader: R,
    schema: &CsvSchema,
) -> Result<IngestReport, IdsError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column_index = |name: &str| -> Result<usize, IdsError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IdsError::MissingColumn(name.to_string()))
    };

    let feature_idx: Vec<usize> = schema
        .feature_columns
        .iter()
        .map(|c| column_index(c))
        .collect::<Result<_, _>>()?;
    let label_idx = match &schema.label_column {
        Some(c) => Some(column_index(c)?),
        None => None,
    };

    let mut rows = Vec::new();
    let mut dropped = 0usize;
    for record in rdr.records() {
        let record = record?;
        let mut values = Vec::with_capacity(feature_idx.len());
        let mut usable = true;
        for &i in &feature_idx {
            match record.get(i).and_then(|cell| cell.trim().parse::<f64>().ok()) {
                Some(v) if v.is_finite() => values.push(v),
                _ => {
                    usable = false;
                    break;
                }
            }
        }
        if !usable {
            dropped += 1;
            continue;
        }
        let label = label_idx.map(|i| parse_label(record.get(i).unwrap_or("")));
        rows.push(FlowFeatures { values, label });
    }
    Ok(IngestReport { rows, dropped })
}
