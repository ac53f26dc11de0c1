//! Parsing of heterogeneous source files into canonical records.
//!
//! State-specific logic lives entirely in data-driven [`MappingConfig`]s;
//! adding a state means writing a config, not code. The fleet incident
//! format has a fixed schema and its own parser ([`parse_sgo_file`]).
//!
//! Unparseable rows are never fatal and never silent: every row is either
//! emitted or tallied against a named rule in the [`IngestReport`], so
//! `rows_read == rows_emitted + sum(rows_dropped_by_rule)` always holds.

mod canonical;
mod cells;
mod config;
mod exposure;
mod mapped;
mod sgo;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canonical::{
    read_classified, read_records, write_classified, write_records, CLASSIFIED_COLUMNS,
    RECORD_COLUMNS,
};
pub use cells::{read_cell_mileage, write_cell_mileage, CELL_COLUMNS};
pub use config::{ColumnMatch, ConfigKind, FieldMap, MappingConfig, Predicate, ValueMapEntry};
pub use exposure::{parse_exposure, read_exposure, write_exposure, EXPOSURE_COLUMNS};
pub use mapped::parse_crash_file;
pub use sgo::parse_sgo_file;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("config error in {source_name}: {message}")]
    Config { source_name: String, message: String },
    #[error("column '{column}' referenced by config '{source_name}' is missing from {path}")]
    MissingColumn {
        source_name: String,
        column: String,
        path: PathBuf,
    },
    #[error("required column '{column}' is missing from {path}")]
    MissingRequiredColumn { column: String, path: PathBuf },
    #[error("value map for column '{column}' is ambiguous: value '{value}' matches patterns '{first}' and '{second}'")]
    AmbiguousValueMap {
        column: String,
        value: String,
        first: String,
        second: String,
    },
    #[error("row error in {path}: {message}")]
    Row { path: PathBuf, message: String },
}

/// Per-file accounting of what was read, emitted, and dropped.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub source: String,
    pub rows_read: u64,
    pub rows_emitted: u64,
    /// Drop tallies keyed by rule name (`in_transport`,
    /// `passenger_vehicle`, `surface_street`, `impact`, `unparseable`).
    pub rows_dropped_by_rule: BTreeMap<String, u64>,
    /// Source values no value-map pattern matched, with occurrence counts.
    pub unmapped_values: Vec<UnmappedValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnmappedValue {
    pub column: String,
    pub value: String,
    pub count: u64,
}

impl IngestReport {
    pub fn new(source: &str) -> Self {
        IngestReport {
            source: source.to_string(),
            ..Default::default()
        }
    }

    pub fn drop(&mut self, rule: &str) {
        *self
            .rows_dropped_by_rule
            .entry(rule.to_string())
            .or_default() += 1;
    }

    pub fn unmapped(&mut self, column: &str, value: &str) {
        if let Some(entry) = self
            .unmapped_values
            .iter_mut()
            .find(|u| u.column == column && u.value == value)
        {
            entry.count += 1;
        } else {
            self.unmapped_values.push(UnmappedValue {
                column: column.to_string(),
                value: value.to_string(),
                count: 1,
            });
        }
    }

    /// The conservation invariant: every row read is accounted for.
    pub fn is_conserved(&self) -> bool {
        self.rows_read == self.rows_emitted + self.rows_dropped_by_rule.values().sum::<u64>()
    }
}

pub(crate) fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "y" | "1" => Some(true),
        "false" | "no" | "n" | "0" | "" => Some(false),
        _ => None,
    }
}

pub(crate) fn open_reader(
    path: &std::path::Path,
    delimiter: u8,
) -> Result<csv::Reader<std::fs::File>, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .from_reader(file))
}
