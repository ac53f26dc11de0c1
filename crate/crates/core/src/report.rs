//! Emission of comparison tables, event-count tables, and the adjustment
//! sensitivity grid.
//!
//! Display columns are rounded the way the tables are read (rates to two
//! decimals, percent differences to signed integers); every emitted file
//! also carries the full-precision `_raw` columns, and those raw values are
//! the only ones anything downstream may compute with. Unbounded upper
//! confidence limits are serialized as the literal token `inf` plus a flag
//! column, never as a sentinel number.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::benchmark::{
    build_benchmarks, BenchmarkError, BenchmarkKey, BenchmarkSettings, CellMileageRow,
};
use crate::classify::ClassifiedRecord;
use crate::model::{CrashGroup, CrashType, ExposureTable, F2rRole, Location, OutcomeLevel};
use crate::stats::{
    compare, AdsObservation, ComparisonResult, ComparisonSet, StatsError, UpperLimit,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv {
        path: std::path::PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("no comparison results to report")]
    EmptyResults,
    #[error("report spec selects no outcomes")]
    EmptySpec,
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Which comparison rows a report includes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSpec {
    /// Outcomes reported at the aggregate (all crash type) level.
    pub outcomes: Vec<OutcomeLevel>,
    /// Outcomes reported per crash-type group.
    pub per_type_outcomes: Vec<OutcomeLevel>,
    /// Also emit the front-to-rear striking/struck split rows.
    pub f2r_split: bool,
    /// Include the mileage-blended all-locations rows.
    pub include_blended: bool,
}

impl Default for ReportSpec {
    fn default() -> Self {
        ReportSpec {
            outcomes: vec![
                OutcomeLevel::AnyInjuryReported,
                OutcomeLevel::AirbagDeployment,
                OutcomeLevel::SuspectedSeriousInjuryPlus,
            ],
            per_type_outcomes: vec![
                OutcomeLevel::AnyInjuryReported,
                OutcomeLevel::AirbagDeployment,
            ],
            f2r_split: true,
            include_blended: true,
        }
    }
}

impl ReportSpec {
    pub fn validate(&self) -> Result<(), ReportError> {
        if self.outcomes.is_empty() && self.per_type_outcomes.is_empty() {
            return Err(ReportError::EmptySpec);
        }
        Ok(())
    }

    fn selects(&self, row: &ComparisonResult) -> bool {
        let Some(outcome) = row.outcome else {
            return false;
        };
        let wanted = match row.crash_type {
            None => self.outcomes.contains(&outcome),
            Some(t) if t.f2r_role.is_some() => {
                self.f2r_split && self.per_type_outcomes.contains(&outcome)
            }
            Some(_) => self.per_type_outcomes.contains(&outcome),
        };
        wanted && (row.location.is_some() || self.include_blended)
    }
}

/// Stable display order: named locations first, blended rows last.
fn location_rank(location: &Option<Location>) -> (u8, String) {
    match location {
        Some(Location::Phoenix) => (0, String::new()),
        Some(Location::SanFrancisco) => (1, String::new()),
        Some(Location::LosAngeles) => (2, String::new()),
        Some(Location::Austin) => (3, String::new()),
        Some(Location::Other(name)) => (4, name.clone()),
        None => (5, String::new()),
    }
}

fn crash_type_rank(crash_type: &Option<CrashType>) -> (u8, CrashGroup, u8) {
    match crash_type {
        None => (0, CrashGroup::Cyclist, 0),
        Some(t) => (
            1,
            t.group,
            match t.f2r_role {
                None => 0,
                Some(F2rRole::Striking) => 1,
                Some(F2rRole::Struck) => 2,
            },
        ),
    }
}

fn sort_rows(rows: &mut [&ComparisonResult]) {
    rows.sort_by_key(|r| {
        (
            location_rank(&r.location),
            r.outcome,
            crash_type_rank(&r.crash_type),
        )
    });
}

pub const BLENDED_LABEL: &str = "All Locations - Mileage Blended";

fn location_label(location: &Option<Location>) -> String {
    match location {
        Some(loc) => loc.as_str().to_string(),
        None => BLENDED_LABEL.to_string(),
    }
}

fn crash_type_label(crash_type: &Option<CrashType>) -> String {
    match crash_type {
        Some(t) => t.to_string(),
        None => "aggregate".to_string(),
    }
}

fn round2(value: f64) -> String {
    format!("{value:.2}")
}

fn round1(value: f64) -> String {
    format!("{value:.1}")
}

/// Percent differences display as signed integers, half away from zero.
fn percent_display(value: f64) -> String {
    format!("{}%", value.round() as i64)
}

pub const COMPARISON_COLUMNS: [&str; 17] = [
    "location",
    "outcome",
    "crash_type",
    "human_ipmm",
    "ads_ipmm",
    "expected_delta",
    "percent_diff",
    "ci_lower",
    "ci_upper",
    "significant",
    "human_ipmm_raw",
    "ads_ipmm_raw",
    "expected_delta_raw",
    "percent_diff_raw",
    "ci_lower_raw",
    "ci_upper_raw",
    "ci_upper_unbounded",
];

/// Writes the comparison table as CSV.
///
/// An empty input is an error; a spec that filters everything out produces
/// a header-only file and a warning.
pub fn emit_comparison_csv(
    path: &Path,
    results: &[ComparisonResult],
    spec: &ReportSpec,
) -> Result<(), ReportError> {
    spec.validate()?;
    if results.is_empty() {
        return Err(ReportError::EmptyResults);
    }
    let mut rows: Vec<&ComparisonResult> =
        results.iter().filter(|r| spec.selects(r)).collect();
    if rows.is_empty() {
        log::warn!(
            "report spec selected no rows; writing header-only {}",
            path.display()
        );
    }
    sort_rows(&mut rows);

    let mut writer = csv::Writer::from_path(path).map_err(|source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source: csv::Error| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(COMPARISON_COLUMNS).map_err(csv_err)?;
    for row in rows {
        let (upper_display, upper_raw, unbounded) = match row.ci_upper {
            UpperLimit::Finite(u) => (percent_display(u), u.to_string(), "false"),
            UpperLimit::Unbounded => ("inf".to_string(), "inf".to_string(), "true"),
        };
        writer
            .write_record([
                location_label(&row.location),
                row.outcome
                    .map(|o| o.as_str().to_string())
                    .unwrap_or_default(),
                crash_type_label(&row.crash_type),
                round2(row.human_rate_ipmm),
                round2(row.ads_rate_ipmm),
                round1(row.expected_count_delta),
                percent_display(row.percent_difference),
                percent_display(row.ci_lower),
                upper_display,
                row.significant.to_string(),
                row.human_rate_ipmm.to_string(),
                row.ads_rate_ipmm.to_string(),
                row.expected_count_delta.to_string(),
                row.percent_difference.to_string(),
                row.ci_lower.to_string(),
                upper_raw,
                unbounded.to_string(),
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the comparison table as a markdown table. Significant rows carry
/// an asterisk on the percent difference; unbounded upper limits render as
/// "unbounded".
pub fn emit_comparison_markdown(
    path: &Path,
    results: &[ComparisonResult],
    spec: &ReportSpec,
) -> Result<(), ReportError> {
    spec.validate()?;
    if results.is_empty() {
        return Err(ReportError::EmptyResults);
    }
    let mut rows: Vec<&ComparisonResult> =
        results.iter().filter(|r| spec.selects(r)).collect();
    sort_rows(&mut rows);

    let io_err = |source: std::io::Error| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    writeln!(
        file,
        "| Location | Outcome | Crash Type | Human IPMM | ADS IPMM | Expected Count Delta | Percent Difference | 95% CI |"
    )
    .map_err(io_err)?;
    writeln!(file, "|---|---|---|---:|---:|---:|---:|---:|").map_err(io_err)?;
    for row in rows {
        let star = if row.significant { "*" } else { "" };
        let ci = match row.ci_upper {
            UpperLimit::Finite(u) => {
                format!("[{}, {}]", percent_display(row.ci_lower), percent_display(u))
            }
            UpperLimit::Unbounded => {
                format!("[{}, unbounded]", percent_display(row.ci_lower))
            }
        };
        let crash_type = match &row.crash_type {
            Some(t) => match (t.group, t.f2r_role) {
                (_, Some(F2rRole::Striking)) => "F2R Striking".to_string(),
                (_, Some(F2rRole::Struck)) => "F2R Struck".to_string(),
                (group, None) => group.label().to_string(),
            },
            None => "All".to_string(),
        };
        writeln!(
            file,
            "| {} | {} | {} | {} | {} | {} | {}{} | {} |",
            location_label(&row.location),
            row.outcome.map(|o| o.label()).unwrap_or(""),
            crash_type,
            round2(row.human_rate_ipmm),
            round2(row.ads_rate_ipmm),
            round1(row.expected_count_delta),
            percent_display(row.percent_difference),
            star,
            ci,
        )
        .map_err(io_err)?;
    }
    Ok(())
}

pub const EVENT_COUNT_COLUMNS: [&str; 4] = [
    "crash_type",
    "any_injury_reported",
    "airbag_deployment",
    "suspected_serious_injury_plus",
];

const EVENT_COUNT_OUTCOMES: [OutcomeLevel; 3] = [
    OutcomeLevel::AnyInjuryReported,
    OutcomeLevel::AirbagDeployment,
    OutcomeLevel::SuspectedSeriousInjuryPlus,
];

/// Weighted event counts per crash-type group and outcome level.
pub fn event_count_matrix(records: &[ClassifiedRecord]) -> BTreeMap<CrashGroup, [f64; 3]> {
    let mut matrix: BTreeMap<CrashGroup, [f64; 3]> = CrashGroup::ALL
        .into_iter()
        .map(|group| (group, [0.0; 3]))
        .collect();
    for record in records {
        let row = matrix
            .get_mut(&record.crash_type.group)
            .expect("all groups present");
        for (i, outcome) in EVENT_COUNT_OUTCOMES.into_iter().enumerate() {
            if record.outcomes.contains(&outcome) {
                row[i] += record.record.weight;
            }
        }
    }
    matrix
}

/// Writes the event-count matrix: one row per crash-type group, one column
/// per injury-relevant outcome. An empty corpus yields an all-zero matrix.
pub fn emit_event_counts(path: &Path, records: &[ClassifiedRecord]) -> Result<(), ReportError> {
    let matrix = event_count_matrix(records);
    let mut writer = csv::Writer::from_path(path).map_err(|source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source: csv::Error| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(EVENT_COUNT_COLUMNS).map_err(csv_err)?;
    for group in CrashGroup::ALL {
        let row = &matrix[&group];
        writer
            .write_record([
                group.as_str().to_string(),
                row[0].to_string(),
                row[1].to_string(),
                row[2].to_string(),
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One row of the sensitivity grid: a comparison under one of the four
/// adjustment variants.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub underreporting: bool,
    pub dynamic: bool,
    pub result: ComparisonResult,
    /// Group verdict shared by the four variants of one analysis cell.
    pub sensitivity: &'static str,
}

/// Runs the benchmark and comparison under all four combinations of
/// {underreporting on/off} x {dynamic on/off}.
///
/// The verdict column reads `flips` when statistical significance differs
/// between variants, `underreporting_insensitive` when the benchmark rate
/// is bit-identical across the underreporting toggle (the case for every
/// outcome the correction does not apply to), and `stable` otherwise.
pub fn sensitivity_grid(
    human: &[ClassifiedRecord],
    exposure: &ExposureTable,
    cells: &[CellMileageRow],
    ads: &BTreeMap<BenchmarkKey, AdsObservation>,
    base_settings: &BenchmarkSettings,
    alpha: f64,
) -> Result<Vec<SensitivityRow>, ReportError> {
    let variants = [(true, true), (true, false), (false, true), (false, false)];
    let mut per_variant: Vec<(bool, bool, ComparisonSet)> = Vec::new();
    for (underreporting, dynamic) in variants {
        let settings = BenchmarkSettings {
            underreporting,
            dynamic,
            ..base_settings.clone()
        };
        let benchmarks = build_benchmarks(human, exposure, cells, &settings)?;
        let comparisons = compare(ads, &benchmarks, alpha)?;
        per_variant.push((underreporting, dynamic, comparisons));
    }

    // Index results by analysis cell to compute the group verdicts.
    let mut by_cell: BTreeMap<BenchmarkKey, Vec<(bool, bool, ComparisonResult)>> = BTreeMap::new();
    for (u, d, set) in per_variant {
        for result in set.results {
            let key = BenchmarkKey {
                location: result.location.clone(),
                outcome: result.outcome.expect("comparison rows carry an outcome"),
                crash_type: result.crash_type,
            };
            by_cell.entry(key).or_default().push((u, d, result));
        }
    }

    let mut rows = Vec::new();
    for (_, group) in by_cell {
        let significance: Vec<bool> = group.iter().map(|(_, _, r)| r.significant).collect();
        let flips = significance.iter().any(|&s| s != significance[0]);
        let rate_of = |u: bool, d: bool| {
            group
                .iter()
                .find(|(gu, gd, _)| *gu == u && *gd == d)
                .map(|(_, _, r)| r.human_rate_ipmm)
        };
        let underreporting_insensitive = [true, false].into_iter().all(|d| {
            match (rate_of(true, d), rate_of(false, d)) {
                (Some(on), Some(off)) => on == off,
                _ => false,
            }
        });
        let verdict = if flips {
            "flips"
        } else if underreporting_insensitive {
            "underreporting_insensitive"
        } else {
            "stable"
        };
        for (underreporting, dynamic, result) in group {
            rows.push(SensitivityRow {
                underreporting,
                dynamic,
                result,
                sensitivity: verdict,
            });
        }
    }
    Ok(rows)
}

pub const SENSITIVITY_COLUMNS: [&str; 12] = [
    "location",
    "outcome",
    "crash_type",
    "underreporting",
    "dynamic",
    "human_ipmm_raw",
    "human_effective_count",
    "percent_diff_raw",
    "ci_lower_raw",
    "ci_upper_raw",
    "significant",
    "sensitivity",
];

pub fn write_sensitivity_grid(path: &Path, rows: &[SensitivityRow]) -> Result<(), ReportError> {
    let mut writer = csv::Writer::from_path(path).map_err(|source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source: csv::Error| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(SENSITIVITY_COLUMNS).map_err(csv_err)?;
    for row in rows {
        let result = &row.result;
        let upper = match result.ci_upper {
            UpperLimit::Finite(u) => u.to_string(),
            UpperLimit::Unbounded => "inf".to_string(),
        };
        writer
            .write_record([
                location_label(&result.location),
                result
                    .outcome
                    .map(|o| o.as_str().to_string())
                    .unwrap_or_default(),
                crash_type_label(&result.crash_type),
                row.underreporting.to_string(),
                row.dynamic.to_string(),
                result.human_rate_ipmm.to_string(),
                result.human_effective_count.to_string(),
                result.percent_difference.to_string(),
                result.ci_lower.to_string(),
                upper,
                result.significant.to_string(),
                row.sensitivity.to_string(),
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::rate_ratio_ci;

    fn result(
        location: Option<Location>,
        outcome: OutcomeLevel,
        crash_type: Option<CrashType>,
    ) -> ComparisonResult {
        let mut r = rate_ratio_ci(24.0, 31.159e6, 65.1, 31.159e6, 0.05).unwrap();
        r.location = location;
        r.outcome = Some(outcome);
        r.crash_type = crash_type;
        r
    }

    #[test]
    fn csv_round_trips_raw_values() {
        let rows = vec![
            result(
                Some(Location::Phoenix),
                OutcomeLevel::AnyInjuryReported,
                None,
            ),
            result(None, OutcomeLevel::AirbagDeployment, None),
        ];
        let file = tempfile::NamedTempFile::new().unwrap();
        emit_comparison_csv(file.path(), &rows, &ReportSpec::default()).unwrap();

        let mut reader = csv::Reader::from_path(file.path()).unwrap();
        let headers = reader.headers().unwrap().clone();
        let raw_idx = headers
            .iter()
            .position(|h| h == "percent_diff_raw")
            .unwrap();
        let first = reader.records().next().unwrap().unwrap();
        let parsed: f64 = first.get(raw_idx).unwrap().parse().unwrap();
        let original = rows[0].percent_difference;
        assert!(
            ((parsed - original) / original).abs() < 1e-12,
            "raw column must round-trip"
        );
    }

    #[test]
    fn display_rounding_does_not_touch_raw_columns() {
        let rows = vec![result(
            Some(Location::Phoenix),
            OutcomeLevel::AnyInjuryReported,
            None,
        )];
        let file = tempfile::NamedTempFile::new().unwrap();
        emit_comparison_csv(file.path(), &rows, &ReportSpec::default()).unwrap();
        let text = std::fs::read_to_string(file.path()).unwrap();
        let data_line = text.lines().nth(1).unwrap();
        // Display shows 2.09 while the raw column keeps full precision.
        assert!(data_line.contains("2.09"), "{data_line}");
        assert!(data_line.contains(&rows[0].human_rate_ipmm.to_string()));
    }

    #[test]
    fn empty_subset_writes_header_only() {
        let rows = vec![result(
            Some(Location::Phoenix),
            OutcomeLevel::PoliceReported,
            None,
        )];
        let spec = ReportSpec {
            outcomes: vec![OutcomeLevel::AirbagDeployment],
            per_type_outcomes: vec![],
            f2r_split: false,
            include_blended: false,
        };
        let file = tempfile::NamedTempFile::new().unwrap();
        emit_comparison_csv(file.path(), &rows, &spec).unwrap();
        let text = std::fs::read_to_string(file.path()).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn empty_results_is_an_error() {
        let file = tempfile::NamedTempFile::new().unwrap();
        assert!(matches!(
            emit_comparison_csv(file.path(), &[], &ReportSpec::default()),
            Err(ReportError::EmptyResults)
        ));
    }

    #[test]
    fn f2r_split_rows_are_emitted_and_ordered() {
        let rows = vec![
            result(
                Some(Location::Phoenix),
                OutcomeLevel::AnyInjuryReported,
                Some(CrashType::f2r(F2rRole::Struck)),
            ),
            result(
                Some(Location::Phoenix),
                OutcomeLevel::AnyInjuryReported,
                Some(CrashType::f2r(F2rRole::Striking)),
            ),
            result(
                Some(Location::Phoenix),
                OutcomeLevel::AnyInjuryReported,
                Some(CrashType::new(CrashGroup::V2VF2R)),
            ),
        ];
        let file = tempfile::NamedTempFile::new().unwrap();
        emit_comparison_csv(file.path(), &rows, &ReportSpec::default()).unwrap();
        let text = std::fs::read_to_string(file.path()).unwrap();
        let types: Vec<&str> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap())
            .collect();
        assert_eq!(types, ["v2v_f2r", "v2v_f2r_striking", "v2v_f2r_struck"]);
    }

    #[test]
    fn event_counts_empty_corpus_is_all_zero() {
        let file = tempfile::NamedTempFile::new().unwrap();
        emit_event_counts(file.path(), &[]).unwrap();
        let text = std::fs::read_to_string(file.path()).unwrap();
        assert_eq!(text.lines().count(), 12);
        for line in text.lines().skip(1) {
            assert!(line.ends_with(",0,0,0"), "{line}");
        }
    }

    #[test]
    fn markdown_marks_significant_rows() {
        let rows = vec![result(
            Some(Location::Phoenix),
            OutcomeLevel::AnyInjuryReported,
            None,
        )];
        assert!(rows[0].significant);
        let file = tempfile::NamedTempFile::new().unwrap();
        emit_comparison_markdown(file.path(), &rows, &ReportSpec::default()).unwrap();
        let text = std::fs::read_to_string(file.path()).unwrap();
        assert!(text.contains("%* |"), "{text}");
    }
}
