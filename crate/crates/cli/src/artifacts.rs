//! CSV formats for the benchmark and comparison artifacts that flow between
//! stages. Raw precision only; display rounding lives in the report stage.

use std::path::Path;
use std::str::FromStr;

use crashbench_core::benchmark::{BenchmarkKey, BenchmarkRate};
use crashbench_core::model::{CrashType, Location, OutcomeLevel};
use crashbench_core::report::BLENDED_LABEL;
use crashbench_core::stats::{ComparisonResult, UpperLimit};

use crate::error::CliError;
use std::collections::BTreeMap;

pub const BENCHMARK_COLUMNS: [&str; 8] = [
    "location",
    "outcome",
    "crash_type",
    "rate_ipmm",
    "effective_count",
    "exposure_miles",
    "underreporting_applied",
    "dynamic_applied",
];

pub const COMPARISON_RAW_COLUMNS: [&str; 17] = [
    "location",
    "outcome",
    "crash_type",
    "ads_count",
    "ads_miles",
    "human_rate_ipmm",
    "human_effective_count",
    "human_exposure_miles",
    "ads_rate_ipmm",
    "rate_ratio",
    "percent_difference",
    "ci_lower",
    "ci_upper",
    "ci_upper_unbounded",
    "significant",
    "expected_count_delta",
    "adjustments",
];

fn location_field(location: &Option<Location>) -> String {
    match location {
        Some(loc) => loc.as_str().to_string(),
        None => BLENDED_LABEL.to_string(),
    }
}

fn parse_location(raw: &str) -> Result<Option<Location>, CliError> {
    if raw == BLENDED_LABEL {
        Ok(None)
    } else {
        Location::from_str(raw)
            .map(Some)
            .map_err(|e| CliError::Parse(e.to_string()))
    }
}

fn crash_type_field(crash_type: &Option<CrashType>) -> String {
    match crash_type {
        Some(t) => t.to_string(),
        None => "aggregate".to_string(),
    }
}

fn parse_crash_type(raw: &str) -> Result<Option<CrashType>, CliError> {
    if raw == "aggregate" {
        Ok(None)
    } else {
        CrashType::from_str(raw)
            .map(Some)
            .map_err(|e| CliError::Parse(e.to_string()))
    }
}

pub fn write_benchmarks(
    path: &Path,
    benchmarks: &BTreeMap<BenchmarkKey, BenchmarkRate>,
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::io(path, format!("cannot write benchmarks: {e}")))?;
    let csv_err = |e: csv::Error| CliError::io(path, e.to_string());
    writer.write_record(BENCHMARK_COLUMNS).map_err(csv_err)?;
    for (key, rate) in benchmarks {
        writer
            .write_record([
                location_field(&key.location),
                key.outcome.as_str().to_string(),
                crash_type_field(&key.crash_type),
                rate.rate.to_string(),
                rate.effective_count.to_string(),
                rate.exposure.to_string(),
                rate.underreporting_applied.to_string(),
                rate.dynamic_applied.to_string(),
            ])
            .map_err(csv_err)?;
    }
    writer
        .flush()
        .map_err(|e| CliError::io(path, e.to_string()))
}

pub fn read_benchmarks(
    path: &Path,
) -> Result<BTreeMap<BenchmarkKey, BenchmarkRate>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::io(path, format!("cannot read benchmarks: {e}")))?;
    let mut out = BTreeMap::new();
    for result in reader.records() {
        let record = result.map_err(|e| CliError::Parse(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let number = |i: usize| -> Result<f64, CliError> {
            field(i)
                .parse()
                .map_err(|_| CliError::Parse(format!("bad number '{}' in {}", field(i), path.display())))
        };
        let flag = |i: usize| -> Result<bool, CliError> {
            field(i)
                .parse()
                .map_err(|_| CliError::Parse(format!("bad flag '{}' in {}", field(i), path.display())))
        };
        let location = parse_location(&field(0))?;
        let outcome: OutcomeLevel = field(1)
            .parse()
            .map_err(|e| CliError::Parse(format!("{e}")))?;
        let crash_type = parse_crash_type(&field(2))?;
        let key = BenchmarkKey {
            location: location.clone(),
            outcome,
            crash_type,
        };
        out.insert(
            key,
            BenchmarkRate {
                location,
                outcome,
                crash_type,
                rate: number(3)?,
                effective_count: number(4)?,
                exposure: number(5)?,
                underreporting_applied: flag(6)?,
                dynamic_applied: flag(7)?,
            },
        );
    }
    Ok(out)
}

pub fn write_comparisons(path: &Path, results: &[ComparisonResult]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::io(path, format!("cannot write comparisons: {e}")))?;
    let csv_err = |e: csv::Error| CliError::io(path, e.to_string());
    writer
        .write_record(COMPARISON_RAW_COLUMNS)
        .map_err(csv_err)?;
    for r in results {
        let (upper, unbounded) = match r.ci_upper {
            UpperLimit::Finite(u) => (u.to_string(), "false"),
            UpperLimit::Unbounded => ("inf".to_string(), "true"),
        };
        let adjustments = format!(
            "underreporting={},dynamic={}",
            r.underreporting_applied, r.dynamic_applied
        );
        writer
            .write_record([
                location_field(&r.location),
                r.outcome.map(|o| o.as_str().to_string()).unwrap_or_default(),
                crash_type_field(&r.crash_type),
                r.ads_count.to_string(),
                r.ads_miles.to_string(),
                r.human_rate_ipmm.to_string(),
                r.human_effective_count.to_string(),
                r.human_exposure.to_string(),
                r.ads_rate_ipmm.to_string(),
                r.rate_ratio.to_string(),
                r.percent_difference.to_string(),
                r.ci_lower.to_string(),
                upper,
                unbounded.to_string(),
                r.significant.to_string(),
                r.expected_count_delta.to_string(),
                adjustments,
            ])
            .map_err(csv_err)?;
    }
    writer
        .flush()
        .map_err(|e| CliError::io(path, e.to_string()))
}

pub fn read_comparisons(path: &Path) -> Result<Vec<ComparisonResult>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::io(path, format!("cannot read comparisons: {e}")))?;
    let mut out = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| CliError::Parse(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let number = |i: usize| -> Result<f64, CliError> {
            let raw = field(i);
            if raw == "inf" {
                return Ok(f64::INFINITY);
            }
            raw.parse()
                .map_err(|_| CliError::Parse(format!("bad number '{raw}' in {}", path.display())))
        };
        let unbounded: bool = field(13)
            .parse()
            .map_err(|_| CliError::Parse("bad flag".to_string()))?;
        let adjustments = field(16);
        out.push(ComparisonResult {
            location: parse_location(&field(0))?,
            outcome: Some(
                field(1)
                    .parse()
                    .map_err(|e| CliError::Parse(format!("{e}")))?,
            ),
            crash_type: parse_crash_type(&field(2))?,
            ads_count: number(3)?,
            ads_miles: number(4)?,
            human_rate_ipmm: number(5)?,
            human_effective_count: number(6)?,
            human_exposure: number(7)?,
            ads_rate_ipmm: number(8)?,
            rate_ratio: number(9)?,
            percent_difference: number(10)?,
            ci_lower: number(11)?,
            ci_upper: if unbounded {
                UpperLimit::Unbounded
            } else {
                UpperLimit::Finite(number(12)?)
            },
            significant: field(14)
                .parse()
                .map_err(|_| CliError::Parse("bad flag".to_string()))?,
            expected_count_delta: number(15)?,
            underreporting_applied: adjustments.contains("underreporting=true"),
            dynamic_applied: adjustments.contains("dynamic=true"),
        });
    }
    Ok(out)
}
