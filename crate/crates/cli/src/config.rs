//! Study configuration: locations, mileage, adjustment settings, inputs.
//!
//! Paths inside a config file resolve relative to the config file's
//! directory, so a study directory is relocatable as a unit.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crashbench_core::benchmark::{BenchmarkSettings, ZeroMilePolicy};
use crashbench_core::model::{Location, OutcomeLevel};
use crashbench_core::report::ReportSpec;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub benchmark: BenchmarkSection,
    #[serde(default)]
    pub inputs: InputsSection,
    /// Keyed by location label (for example "Phoenix").
    pub locations: BTreeMap<String, LocationSection>,
    #[serde(default)]
    pub report: ReportSection,
    /// Not serialized: directory the config was loaded from.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    #[serde(default = "default_factor")]
    pub underreporting_factor: f64,
    #[serde(default = "default_true")]
    pub underreporting: bool,
    #[serde(default = "default_true")]
    pub dynamic: bool,
    /// Cell-mileage CSV path.
    pub cells: PathBuf,
    #[serde(default)]
    pub zero_mile_fallback: bool,
}

fn default_factor() -> f64 {
    1.47
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsSection {
    /// Fleet incident extract (fixed schema).
    pub sgo: Option<PathBuf>,
    #[serde(default)]
    pub crashes: Vec<MappedInput>,
    #[serde(default)]
    pub exposure: Vec<MappedInput>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappedInput {
    pub config: PathBuf,
    pub file: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationSection {
    pub ads_miles: f64,
    pub vm4_passenger_share: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    pub outcomes: Vec<String>,
    pub per_type_outcomes: Vec<String>,
    pub f2r_split: bool,
    pub include_blended: bool,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            outcomes: vec![
                "any_injury_reported".to_string(),
                "airbag_deployment".to_string(),
                "suspected_serious_injury_plus".to_string(),
            ],
            per_type_outcomes: vec![
                "any_injury_reported".to_string(),
                "airbag_deployment".to_string(),
            ],
            f2r_split: true,
            include_blended: true,
        }
    }
}

impl StudyConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path, format!("cannot read config: {e}")))?;
        let mut config: StudyConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(0.0..1.0).contains(&self.alpha) || self.alpha == 0.0 {
            return Err(CliError::Config(format!(
                "alpha must lie strictly between 0 and 1, got {}",
                self.alpha
            )));
        }
        if self.locations.is_empty() {
            return Err(CliError::Config(
                "at least one [locations.*] entry is required".to_string(),
            ));
        }
        for (label, section) in &self.locations {
            Location::from_str(label)
                .map_err(|e| CliError::Config(format!("bad location label: {e}")))?;
            if section.ads_miles <= 0.0 {
                return Err(CliError::Config(format!(
                    "ads_miles for '{label}' must be positive"
                )));
            }
            if !(0.0..=1.0).contains(&section.vm4_passenger_share) {
                return Err(CliError::Config(format!(
                    "vm4_passenger_share for '{label}' must lie in [0, 1]"
                )));
            }
        }
        for outcome in self
            .report
            .outcomes
            .iter()
            .chain(&self.report.per_type_outcomes)
        {
            OutcomeLevel::from_str(outcome)
                .map_err(|e| CliError::Config(format!("bad report outcome: {e}")))?;
        }
        Ok(())
    }

    /// Resolves a config-relative path.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn ads_miles(&self) -> BTreeMap<Location, f64> {
        self.locations
            .iter()
            .map(|(label, s)| (label.parse().expect("validated"), s.ads_miles))
            .collect()
    }

    pub fn benchmark_settings(&self) -> BenchmarkSettings {
        BenchmarkSettings {
            passenger_share: self
                .locations
                .iter()
                .map(|(label, s)| (label.parse().expect("validated"), s.vm4_passenger_share))
                .collect(),
            ads_miles: self.ads_miles(),
            underreporting_factor: self.benchmark.underreporting_factor,
            underreporting: self.benchmark.underreporting,
            dynamic: self.benchmark.dynamic,
            zero_mile_policy: if self.benchmark.zero_mile_fallback {
                ZeroMilePolicy::FallbackRegionRate
            } else {
                ZeroMilePolicy::Abort
            },
            per_type_outcomes: self
                .report
                .per_type_outcomes
                .iter()
                .map(|o| o.parse().expect("validated"))
                .collect(),
        }
    }

    pub fn report_spec(&self) -> ReportSpec {
        ReportSpec {
            outcomes: self
                .report
                .outcomes
                .iter()
                .map(|o| o.parse().expect("validated"))
                .collect(),
            per_type_outcomes: self
                .report
                .per_type_outcomes
                .iter()
                .map(|o| o.parse().expect("validated"))
                .collect(),
            f2r_split: self.report.f2r_split,
            include_blended: self.report.include_blended,
        }
    }
}
