//! Stage implementations. Every stage reads files, writes files, and drops
//! a manifest beside its outputs; the pipeline subcommand is nothing more
//! than the stages run in order on well-known file names.

use std::path::{Path, PathBuf};

use crashbench_core::benchmark::build_benchmarks;
use crashbench_core::classify::classify_record;
use crashbench_core::ingest::{
    parse_crash_file, parse_exposure, parse_sgo_file, read_cell_mileage, read_classified,
    read_exposure, read_records, write_classified, write_exposure, write_records, IngestReport,
    MappingConfig,
};
use crashbench_core::model::{CrashRecord, ExposureTable};
use crashbench_core::report::{
    emit_comparison_csv, emit_comparison_markdown, emit_event_counts, sensitivity_grid,
    write_sensitivity_grid,
};
use crashbench_core::simulate::{simulate, Scenario};
use crashbench_core::stats::{ads_observations, compare};

use crate::artifacts::{read_benchmarks, read_comparisons, write_benchmarks, write_comparisons};
use crate::config::StudyConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;

/// Output file names shared between the stages and the pipeline.
pub mod names {
    pub const ADS_RECORDS: &str = "ads.records.csv";
    pub const ADS_REPORT: &str = "ads.ingest_report.json";
    pub const HUMAN_RECORDS: &str = "human.records.csv";
    pub const EXPOSURE: &str = "exposure.csv";
    pub const ADS_CLASSIFIED: &str = "ads.classified.csv";
    pub const HUMAN_CLASSIFIED: &str = "human.classified.csv";
    pub const BENCHMARKS: &str = "benchmarks.csv";
    pub const COMPARISONS: &str = "comparisons.csv";
    pub const GAPS: &str = "comparison_gaps.csv";
    pub const TABLE_CSV: &str = "comparison_table.csv";
    pub const TABLE_MD: &str = "comparison_table.md";
    pub const EVENT_COUNTS: &str = "event_counts.csv";
    pub const SENSITIVITY: &str = "sensitivity_grid.csv";
    pub const TRUTH: &str = "truth.json";
}

/// Fails with a data-gap error when an upstream artifact is missing.
fn require_artifact(path: &Path, produced_by: &str) -> Result<(), CliError> {
    if !path.exists() {
        return Err(CliError::DataGap(format!(
            "missing upstream artifact '{}'; run the {produced_by} stage first",
            path.display()
        )));
    }
    Ok(())
}

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e.to_string()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let json =
        serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e.to_string()))?;
    std::fs::write(path, json + "\n").map_err(|e| CliError::io(path, e.to_string()))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "input".to_string())
}

/// First header line of a CSV, for dispatching mixed `--input` lists.
fn sniff_header(path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(path, format!("cannot read: {e}")))?;
    Ok(text.lines().next().unwrap_or("").to_string())
}

pub fn is_classified_header(header: &str) -> bool {
    header.starts_with("crash_id,") && header.contains(",crash_type,")
}

pub fn is_records_header(header: &str) -> bool {
    header.starts_with("crash_id,") && !header.contains(",crash_type,")
}

pub fn is_exposure_header(header: &str) -> bool {
    header.starts_with("location,road_class,vehicle_class,")
}

pub fn is_benchmarks_header(header: &str) -> bool {
    header.starts_with("location,outcome,crash_type,rate_ipmm,")
}

pub fn is_comparisons_header(header: &str) -> bool {
    header.starts_with("location,outcome,crash_type,ads_count,")
}

/// Ingest: every configured source file becomes canonical records, with one
/// ingest report per file, a merged human corpus, and a merged exposure
/// table.
pub fn run_ingest(config: &StudyConfig, out: &Path) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let mut manifest = RunManifest::new("ingest");

    let mut human: Vec<CrashRecord> = Vec::new();
    for input in &config.inputs.crashes {
        let config_path = config.resolve(&input.config);
        let file_path = config.resolve(&input.file);
        manifest.record_config(&config_path)?;
        manifest.record_input(&file_path)?;
        let mapping = MappingConfig::load(&config_path)?;
        let (records, report) = parse_crash_file(&file_path, &mapping)?;
        log_report(&report);
        let stem = file_stem(&file_path);
        let records_path = out.join(format!("{stem}.records.csv"));
        let report_path = out.join(format!("{stem}.ingest_report.json"));
        write_records(&records_path, &records)?;
        write_json(&report_path, &report)?;
        manifest.record_output(&records_path)?;
        manifest.record_output(&report_path)?;
        human.extend(records);
    }
    human.sort_by(|a, b| a.crash_id.cmp(&b.crash_id));
    let human_path = out.join(names::HUMAN_RECORDS);
    write_records(&human_path, &human)?;
    manifest.record_output(&human_path)?;

    if let Some(sgo) = &config.inputs.sgo {
        let sgo_path = config.resolve(sgo);
        manifest.record_input(&sgo_path)?;
        let (records, report) = parse_sgo_file(&sgo_path)?;
        log_report(&report);
        let records_path = out.join(names::ADS_RECORDS);
        write_records(&records_path, &records)?;
        write_json(&out.join(names::ADS_REPORT), &report)?;
        manifest.record_output(&records_path)?;
        manifest.record_output(&out.join(names::ADS_REPORT))?;
    }

    let mut exposure = ExposureTable::default();
    for input in &config.inputs.exposure {
        let config_path = config.resolve(&input.config);
        let file_path = config.resolve(&input.file);
        manifest.record_config(&config_path)?;
        manifest.record_input(&file_path)?;
        let mapping = MappingConfig::load(&config_path)?;
        let table = parse_exposure(&file_path, &mapping)?;
        exposure.rows.extend(table.rows);
    }
    let exposure_path = out.join(names::EXPOSURE);
    write_exposure(&exposure_path, &exposure)?;
    manifest.record_output(&exposure_path)?;

    manifest.stage("ingest", "ok");
    manifest.write(out)?;
    Ok(())
}

fn log_report(report: &IngestReport) {
    log::info!(
        "{}: read {}, emitted {}, dropped {:?}",
        report.source,
        report.rows_read,
        report.rows_emitted,
        report.rows_dropped_by_rule
    );
    for unmapped in &report.unmapped_values {
        log::warn!(
            "{}: unmapped value '{}' in column '{}' ({} rows)",
            report.source,
            unmapped.value,
            unmapped.column,
            unmapped.count
        );
    }
}

/// Classify: canonical records in, classified records out, one output per
/// input with `.records` replaced by `.classified`.
pub fn run_classify(inputs: &[PathBuf], out: &Path) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let mut manifest = RunManifest::new("classify");
    for input in inputs {
        require_artifact(input, "ingest")?;
        manifest.record_input(input)?;
        let records = read_records(input)?;
        let classified: Result<Vec<_>, _> =
            records.into_iter().map(classify_record).collect();
        let classified = classified.map_err(|e| CliError::Parse(e.to_string()))?;
        let stem = file_stem(input).replace(".records", "");
        let path = out.join(format!("{stem}.classified.csv"));
        write_classified(&path, &classified)?;
        manifest.record_output(&path)?;
    }
    manifest.stage("classify", "ok");
    manifest.write(out)?;
    Ok(())
}

/// Benchmark: classified human corpus plus exposure and cell mileage in,
/// adjusted benchmark set out.
pub fn run_benchmark(
    config: &StudyConfig,
    human_classified: &Path,
    exposure_csv: &Path,
    out: &Path,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let mut manifest = RunManifest::new("benchmark");
    require_artifact(human_classified, "classify")?;
    require_artifact(exposure_csv, "ingest")?;
    manifest.record_input(human_classified)?;
    manifest.record_input(exposure_csv)?;

    let corpus = read_classified(human_classified)?;
    let exposure = read_exposure(exposure_csv)?;
    let cells_path = config.resolve(&config.benchmark.cells);
    let cells = if config.benchmark.dynamic {
        require_artifact(&cells_path, "ingest (cell mileage input)")?;
        manifest.record_input(&cells_path)?;
        read_cell_mileage(&cells_path)?
    } else if cells_path.exists() {
        manifest.record_input(&cells_path)?;
        read_cell_mileage(&cells_path)?
    } else {
        Vec::new()
    };

    let settings = config.benchmark_settings();
    let benchmarks = build_benchmarks(&corpus, &exposure, &cells, &settings)?;
    let path = out.join(names::BENCHMARKS);
    write_benchmarks(&path, &benchmarks)?;
    manifest.record_output(&path)?;
    manifest.stage("benchmark", "ok");
    manifest.write(out)?;
    Ok(())
}

/// Compare: classified fleet corpus against the benchmark set.
pub fn run_compare(
    config: &StudyConfig,
    ads_classified: &Path,
    benchmarks_csv: &Path,
    out: &Path,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let mut manifest = RunManifest::new("compare");
    require_artifact(ads_classified, "classify")?;
    require_artifact(benchmarks_csv, "benchmark")?;
    manifest.record_input(ads_classified)?;
    manifest.record_input(benchmarks_csv)?;

    let corpus = read_classified(ads_classified)?;
    let benchmarks = read_benchmarks(benchmarks_csv)?;
    let observations = ads_observations(&corpus, &config.ads_miles());
    let comparison = compare(&observations, &benchmarks, config.alpha)?;

    let path = out.join(names::COMPARISONS);
    write_comparisons(&path, &comparison.results)?;
    manifest.record_output(&path)?;

    let gaps_path = out.join(names::GAPS);
    let mut writer = csv::Writer::from_path(&gaps_path)
        .map_err(|e| CliError::io(&gaps_path, e.to_string()))?;
    writer
        .write_record(["location", "outcome", "crash_type", "reason"])
        .map_err(|e| CliError::io(&gaps_path, e.to_string()))?;
    for gap in &comparison.gaps {
        writer
            .write_record([
                gap.location
                    .as_ref()
                    .map(|l| l.as_str().to_string())
                    .unwrap_or_else(|| "All Locations - Mileage Blended".to_string()),
                gap.outcome.as_str().to_string(),
                gap.crash_type
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "aggregate".to_string()),
                gap.reason.clone(),
            ])
            .map_err(|e| CliError::io(&gaps_path, e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::io(&gaps_path, e.to_string()))?;
    manifest.record_output(&gaps_path)?;
    manifest.stage("compare", "ok");
    manifest.write(out)?;
    Ok(())
}

/// Report: display tables, event counts, and the sensitivity grid.
pub fn run_report(
    config: &StudyConfig,
    comparisons_csv: &Path,
    ads_classified: &Path,
    human_classified: &Path,
    exposure_csv: &Path,
    out: &Path,
    markdown: bool,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let mut manifest = RunManifest::new("report");
    for (path, stage) in [
        (comparisons_csv, "compare"),
        (ads_classified, "classify"),
        (human_classified, "classify"),
        (exposure_csv, "ingest"),
    ] {
        require_artifact(path, stage)?;
        manifest.record_input(path)?;
    }

    let results = read_comparisons(comparisons_csv)?;
    let spec = config.report_spec();
    let table_path = out.join(names::TABLE_CSV);
    emit_comparison_csv(&table_path, &results, &spec)?;
    manifest.record_output(&table_path)?;
    if markdown {
        let md_path = out.join(names::TABLE_MD);
        emit_comparison_markdown(&md_path, &results, &spec)?;
        manifest.record_output(&md_path)?;
    }

    let ads_corpus = read_classified(ads_classified)?;
    let counts_path = out.join(names::EVENT_COUNTS);
    emit_event_counts(&counts_path, &ads_corpus)?;
    manifest.record_output(&counts_path)?;

    let human_corpus = read_classified(human_classified)?;
    let exposure = read_exposure(exposure_csv)?;
    let cells_path = config.resolve(&config.benchmark.cells);
    require_artifact(&cells_path, "ingest (cell mileage input)")?;
    manifest.record_input(&cells_path)?;
    let cells = read_cell_mileage(&cells_path)?;
    let observations = ads_observations(&ads_corpus, &config.ads_miles());
    let grid = sensitivity_grid(
        &human_corpus,
        &exposure,
        &cells,
        &observations,
        &config.benchmark_settings(),
        config.alpha,
    )?;
    let grid_path = out.join(names::SENSITIVITY);
    write_sensitivity_grid(&grid_path, &grid)?;
    manifest.record_output(&grid_path)?;

    manifest.stage("report", "ok");
    manifest.write(out)?;
    Ok(())
}

/// All stages in order on well-known file names.
pub fn run_pipeline(config: &StudyConfig, out: &Path, markdown: bool) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let mut manifest = RunManifest::new("pipeline");

    run_ingest(config, out)?;
    manifest.stage("ingest", "ok");

    run_classify(
        &[out.join(names::ADS_RECORDS), out.join(names::HUMAN_RECORDS)],
        out,
    )?;
    manifest.stage("classify", "ok");

    run_benchmark(
        config,
        &out.join(names::HUMAN_CLASSIFIED),
        &out.join(names::EXPOSURE),
        out,
    )?;
    manifest.stage("benchmark", "ok");

    run_compare(
        config,
        &out.join(names::ADS_CLASSIFIED),
        &out.join(names::BENCHMARKS),
        out,
    )?;
    manifest.stage("compare", "ok");

    run_report(
        config,
        &out.join(names::COMPARISONS),
        &out.join(names::ADS_CLASSIFIED),
        &out.join(names::HUMAN_CLASSIFIED),
        &out.join(names::EXPOSURE),
        out,
        markdown,
    )?;
    manifest.stage("report", "ok");

    manifest.write(out)?;
    Ok(())
}

/// Simulate: synthetic corpora plus truth file from a scenario config.
pub fn run_simulate(
    scenario_path: &Path,
    seed_override: Option<u64>,
    out: &Path,
) -> Result<(), CliError> {
    ensure_out_dir(out)?;
    let mut manifest = RunManifest::new("simulate");
    manifest.record_config(scenario_path)?;

    let text = std::fs::read_to_string(scenario_path)
        .map_err(|e| CliError::io(scenario_path, format!("cannot read scenario: {e}")))?;
    let mut scenario: Scenario = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", scenario_path.display())))?;
    if let Some(seed) = seed_override {
        scenario.seed = seed;
    }

    let study = simulate(&scenario)?;

    let human_path = out.join("human.records.csv");
    write_records(&human_path, &study.human_records)?;
    let ads_path = out.join(names::ADS_RECORDS);
    write_records(&ads_path, &study.ads_records)?;
    let exposure_path = out.join(names::EXPOSURE);
    write_exposure(&exposure_path, &study.exposure)?;
    let cells_path = out.join("cells.csv");
    crashbench_core::ingest::write_cell_mileage(&cells_path, &study.cells)?;
    let truth_path = out.join(names::TRUTH);
    write_json(&truth_path, &study.truth)?;

    for path in [&human_path, &ads_path, &exposure_path, &cells_path, &truth_path] {
        manifest.record_output(path)?;
    }
    manifest.stage("simulate", "ok");
    manifest.write(out)?;
    Ok(())
}

/// Splits a mixed `--input` list into the roles a stage expects, using the
/// header line of each file. Classified files keep their given order.
pub struct SortedInputs {
    pub records: Vec<PathBuf>,
    pub classified: Vec<PathBuf>,
    pub exposure: Vec<PathBuf>,
    pub benchmarks: Vec<PathBuf>,
    pub comparisons: Vec<PathBuf>,
}

pub fn sort_inputs(inputs: &[PathBuf]) -> Result<SortedInputs, CliError> {
    let mut sorted = SortedInputs {
        records: Vec::new(),
        classified: Vec::new(),
        exposure: Vec::new(),
        benchmarks: Vec::new(),
        comparisons: Vec::new(),
    };
    for input in inputs {
        require_artifact(input, "upstream")?;
        let header = sniff_header(input)?;
        if is_comparisons_header(&header) {
            sorted.comparisons.push(input.clone());
        } else if is_benchmarks_header(&header) {
            sorted.benchmarks.push(input.clone());
        } else if is_exposure_header(&header) {
            sorted.exposure.push(input.clone());
        } else if is_classified_header(&header) {
            sorted.classified.push(input.clone());
        } else if is_records_header(&header) {
            sorted.records.push(input.clone());
        } else {
            return Err(CliError::Parse(format!(
                "unrecognized input format: {}",
                input.display()
            )));
        }
    }
    Ok(sorted)
}
