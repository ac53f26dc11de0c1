//! Declarative source-schema to canonical-field mapping configs.
//!
//! A config is a TOML document naming the source, the keep-predicates for
//! subselection, and per-column value maps. The schema is documented in
//! `docs/data_dictionary.md` and validated before use.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

use super::IngestError;

/// Which parser a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigKind {
    Crash,
    Exposure,
}

/// One source-value pattern and the canonical value it maps to.
///
/// Patterns are exact strings, a trailing-`*` prefix, or the lone `*`
/// catch-all. Matching is case-insensitive on trimmed values.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueMapEntry {
    pub pattern: String,
    pub value: String,
}

impl ValueMapEntry {
    pub fn matches(&self, raw: &str) -> bool {
        let value = raw.trim();
        if self.pattern == "*" {
            return true;
        }
        if let Some(prefix) = self.pattern.strip_suffix('*') {
            return value.len() >= prefix.len()
                && value[..prefix.len()].eq_ignore_ascii_case(prefix);
        }
        value.eq_ignore_ascii_case(&self.pattern)
    }
}

/// Maps one source column onto one canonical field, optionally through a
/// value map. Without a value map the raw source value is parsed directly.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMap {
    pub source: String,
    pub field: String,
    #[serde(default)]
    pub values: Vec<ValueMapEntry>,
}

impl FieldMap {
    /// First-match translation. `Ok(None)` means no pattern matched.
    pub fn translate<'a>(&'a self, raw: &'a str) -> Option<&'a str> {
        if self.values.is_empty() {
            return Some(raw);
        }
        let hits: Vec<&ValueMapEntry> =
            self.values.iter().filter(|v| v.matches(raw)).collect();
        // A specific pattern shadowing the catch-all is normal; two specific
        // patterns both matching is worth a look in the config. First-match
        // ordering applies either way.
        if hits.iter().filter(|v| v.pattern != "*").count() > 1 {
            log::warn!(
                "value '{}' in column '{}' matches {} patterns; using '{}'",
                raw,
                self.source,
                hits.len(),
                hits[0].pattern
            );
        }
        hits.first().map(|v| v.value.as_str())
    }
}

/// A predicate over the source columns of one row.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum Predicate {
    All { all: Vec<Predicate> },
    Any { any: Vec<Predicate> },
    Not { not: Box<Predicate> },
    Match(ColumnMatch),
}

/// Leaf predicate: the column's value matches one of the patterns.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMatch {
    pub column: String,
    pub one_of: Vec<String>,
}

impl Predicate {
    pub fn evaluate(&self, get: &dyn Fn(&str) -> Option<String>) -> bool {
        match self {
            Predicate::All { all } => all.iter().all(|p| p.evaluate(get)),
            Predicate::Any { any } => any.iter().any(|p| p.evaluate(get)),
            Predicate::Not { not } => !not.evaluate(get),
            Predicate::Match(m) => {
                let value = get(&m.column).unwrap_or_default();
                m.one_of.iter().any(|pattern| {
                    ValueMapEntry {
                        pattern: pattern.clone(),
                        value: String::new(),
                    }
                    .matches(&value)
                })
            }
        }
    }

    fn columns<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Predicate::All { all } | Predicate::Any { any: all } => {
                all.iter().for_each(|p| p.columns(out))
            }
            Predicate::Not { not } => not.columns(out),
            Predicate::Match(m) => {
                out.insert(&m.column);
            }
        }
    }
}

/// Declarative source-schema to canonical-field rules for one dataset.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingConfig {
    pub kind: ConfigKind,
    pub source_name: String,
    /// Field delimiter: `","` (default) or `"\t"`.
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    /// Weight assigned to records whose vehicle type could not be resolved.
    #[serde(default = "default_unknown_weight")]
    pub unknown_vehicle_weight: f64,
    /// Rows failing this keep in-transport subselection are dropped.
    #[serde(default)]
    pub in_transport_rules: Option<Predicate>,
    /// Rows failing this passenger-vehicle subselection are dropped. The
    /// predicate must also pass rows that map to `unknown_vehicle`; those
    /// are kept at `unknown_vehicle_weight`.
    #[serde(default)]
    pub passenger_vehicle_rules: Option<Predicate>,
    /// Rows failing this surface-street subselection are dropped.
    #[serde(default)]
    pub surface_street_rules: Option<Predicate>,
    #[serde(default)]
    pub field_map: Vec<FieldMap>,
}

fn default_delimiter() -> String {
    ",".to_string()
}

fn default_unknown_weight() -> f64 {
    1.0
}

/// Canonical crash-record fields a crash config may target.
pub const CRASH_FIELDS: &[&str] = &[
    "crash_id",
    "location",
    "latitude",
    "longitude",
    "road_class",
    "subject_body_class",
    "partner_body_class",
    "partner_in_transport",
    "sequence_position",
    "configuration",
    "max_injury",
    "any_airbag_any_vehicle",
    "police_reported",
    "police_confirmed_serious",
    "initiator_role",
    "f2r_role",
    "stopped_duration_s",
    "peak_decel_mps2",
];

/// Canonical exposure fields an exposure config may target.
pub const EXPOSURE_FIELDS: &[&str] = &["location", "road_class", "miles", "cell_id"];

impl MappingConfig {
    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: MappingConfig =
            toml::from_str(&text).map_err(|e| IngestError::Config {
                source_name: path.display().to_string(),
                message: e.to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn delimiter_byte(&self) -> Result<u8, IngestError> {
        match self.delimiter.as_str() {
            "," => Ok(b','),
            "\t" | "\\t" => Ok(b'\t'),
            other => Err(IngestError::Config {
                source_name: self.source_name.clone(),
                message: format!("unsupported delimiter '{other}' (use \",\" or \"\\t\")"),
            }),
        }
    }

    /// Structural validation: every targeted field must exist in the
    /// canonical schema, weights must be probabilities, and no two exact
    /// patterns in one value map may collide.
    pub fn validate(&self) -> Result<(), IngestError> {
        let config_err = |message: String| IngestError::Config {
            source_name: self.source_name.clone(),
            message,
        };
        if !(0.0..=1.0).contains(&self.unknown_vehicle_weight) {
            return Err(config_err(format!(
                "unknown_vehicle_weight must lie in [0, 1], got {}",
                self.unknown_vehicle_weight
            )));
        }
        self.delimiter_byte()?;
        let allowed: &[&str] = match self.kind {
            ConfigKind::Crash => CRASH_FIELDS,
            ConfigKind::Exposure => EXPOSURE_FIELDS,
        };
        let mut targeted = BTreeSet::new();
        for fm in &self.field_map {
            if !allowed.contains(&fm.field.as_str()) {
                return Err(config_err(format!(
                    "'{}' is not a canonical field (column '{}')",
                    fm.field, fm.source
                )));
            }
            if !targeted.insert(&fm.field) {
                return Err(config_err(format!(
                    "canonical field '{}' is mapped twice",
                    fm.field
                )));
            }
            for (i, a) in fm.values.iter().enumerate() {
                for b in fm.values.iter().skip(i + 1) {
                    if a.pattern.eq_ignore_ascii_case(&b.pattern) {
                        return Err(IngestError::AmbiguousValueMap {
                            column: fm.source.clone(),
                            value: a.pattern.clone(),
                            first: a.pattern.clone(),
                            second: b.pattern.clone(),
                        });
                    }
                }
            }
        }
        let required: &[&str] = match self.kind {
            ConfigKind::Crash => &["crash_id", "location"],
            ConfigKind::Exposure => &["location", "miles"],
        };
        for field in required {
            if !targeted.contains(&field.to_string()) {
                return Err(config_err(format!(
                    "required canonical field '{field}' is not mapped"
                )));
            }
        }
        Ok(())
    }

    /// Source columns the config references anywhere.
    pub fn referenced_columns(&self) -> BTreeSet<&str> {
        let mut columns = BTreeSet::new();
        for fm in &self.field_map {
            columns.insert(fm.source.as_str());
        }
        for rules in [
            &self.in_transport_rules,
            &self.passenger_vehicle_rules,
            &self.surface_street_rules,
        ]
        .into_iter()
        .flatten()
        {
            rules.columns(&mut columns);
        }
        columns
    }

    pub fn field(&self, name: &str) -> Option<&FieldMap> {
        self.field_map.iter().find(|fm| fm.field == name)
    }
}
