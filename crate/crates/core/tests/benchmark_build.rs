//! Benchmark-builder and sensitivity-grid behavior on realistic inputs:
//! the shipped fixture corpus and synthetic uniform-share studies.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crashbench_core::benchmark::{
    build_benchmarks, BenchmarkKey, BenchmarkRate, BenchmarkSettings,
};
use crashbench_core::classify::classify_record;
use crashbench_core::ingest::{
    parse_crash_file, parse_exposure, read_cell_mileage, MappingConfig,
};
use crashbench_core::model::{CrashType, ExposureTable, Location, OutcomeLevel};
use crashbench_core::report::sensitivity_grid;
use crashbench_core::simulate::{simulate, AdsDistribution, Scenario};
use crashbench_core::stats::{ads_observations, AdsObservation};

fn repo_path(relative: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(relative)
}

fn fixture_settings() -> BenchmarkSettings {
    BenchmarkSettings {
        passenger_share: [
            (Location::Phoenix, 0.9375),
            (Location::SanFrancisco, 0.9375),
            (Location::LosAngeles, 0.9375),
            (Location::Austin, 0.9375),
        ]
        .into_iter()
        .collect(),
        ads_miles: [
            (Location::Phoenix, 31.159e6),
            (Location::SanFrancisco, 18.260e6),
            (Location::LosAngeles, 6.448e6),
            (Location::Austin, 0.834e6),
        ]
        .into_iter()
        .collect(),
        ..Default::default()
    }
}

fn fixture_benchmarks() -> BTreeMap<BenchmarkKey, BenchmarkRate> {
    let mut corpus = Vec::new();
    for (config, fixture) in [
        ("configs/az.toml", "fixtures/az_crashes.csv"),
        ("configs/sf.toml", "fixtures/sf_crashes.csv"),
        ("configs/la.toml", "fixtures/la_crashes.csv"),
        ("configs/tx.toml", "fixtures/tx_crashes.csv"),
    ] {
        let mapping = MappingConfig::load(&repo_path(config)).unwrap();
        let (records, _) = parse_crash_file(&repo_path(fixture), &mapping).unwrap();
        corpus.extend(records.into_iter().map(|r| classify_record(r).unwrap()));
    }
    let mut exposure = ExposureTable::default();
    for (config, fixture) in [
        ("configs/az_miles.toml", "fixtures/az_exposure.csv"),
        ("configs/ca_miles.toml", "fixtures/ca_exposure.csv"),
        ("configs/tx_miles.toml", "fixtures/tx_exposure.csv"),
    ] {
        let mapping = MappingConfig::load(&repo_path(config)).unwrap();
        exposure
            .rows
            .extend(parse_exposure(&repo_path(fixture), &mapping).unwrap().rows);
    }
    let cells = read_cell_mileage(&repo_path("fixtures/cells.csv")).unwrap();
    build_benchmarks(&corpus, &exposure, &cells, &fixture_settings()).unwrap()
}

#[test]
fn fixture_benchmarks_land_on_reference_displays() {
    let benchmarks = fixture_benchmarks();
    let rate = |location: Option<Location>, outcome: OutcomeLevel| {
        benchmarks[&BenchmarkKey {
            location,
            outcome,
            crash_type: None,
        }]
            .rate
    };
    use OutcomeLevel::*;
    let cases = [
        (Some(Location::Phoenix), AnyInjuryReported, "2.09"),
        (Some(Location::Phoenix), AirbagDeployment, "1.42"),
        (Some(Location::Phoenix), SuspectedSeriousInjuryPlus, "0.12"),
        (Some(Location::SanFrancisco), AnyInjuryReported, "8.02"),
        (Some(Location::SanFrancisco), AirbagDeployment, "2.31"),
        (Some(Location::SanFrancisco), SuspectedSeriousInjuryPlus, "0.46"),
        (None, AnyInjuryReported, "4.04"),
        (None, AirbagDeployment, "1.69"),
        (None, SuspectedSeriousInjuryPlus, "0.24"),
    ];
    for (location, outcome, display) in cases {
        let value = rate(location.clone(), outcome);
        assert_eq!(
            format!("{value:.2}"),
            display,
            "{location:?} {outcome}: {value}"
        );
    }

    // Every emitted rate satisfies the effective-count invariant.
    for (key, bench) in &benchmarks {
        let implied = 1.0e6 * bench.effective_count / bench.exposure;
        assert!(
            (implied - bench.rate).abs() <= 1e-9 * bench.rate.max(1e-12),
            "{key:?}: rate {} vs implied {implied}",
            bench.rate
        );
    }

    // The front-to-rear role splits each carry half the group benchmark.
    let f2r = benchmarks[&BenchmarkKey {
        location: Some(Location::Phoenix),
        outcome: AnyInjuryReported,
        crash_type: Some("v2v_f2r".parse::<CrashType>().unwrap()),
    }]
        .rate;
    for role in ["v2v_f2r_striking", "v2v_f2r_struck"] {
        let split = benchmarks[&BenchmarkKey {
            location: Some(Location::Phoenix),
            outcome: AnyInjuryReported,
            crash_type: Some(role.parse::<CrashType>().unwrap()),
        }]
            .rate;
        assert!((split - f2r / 2.0).abs() <= 1e-12 * f2r);
    }
}

#[test]
fn sensitivity_grid_flags_untouched_outcomes_and_scales_any_injury() {
    let mut corpus = Vec::new();
    let mapping = MappingConfig::load(&repo_path("configs/az.toml")).unwrap();
    let (records, _) =
        parse_crash_file(&repo_path("fixtures/az_crashes.csv"), &mapping).unwrap();
    corpus.extend(records.into_iter().map(|r| classify_record(r).unwrap()));

    let mapping = MappingConfig::load(&repo_path("configs/az_miles.toml")).unwrap();
    let exposure = parse_exposure(&repo_path("fixtures/az_exposure.csv"), &mapping).unwrap();
    let cells: Vec<_> = read_cell_mileage(&repo_path("fixtures/cells.csv"))
        .unwrap()
        .into_iter()
        .filter(|c| c.location == Location::Phoenix)
        .collect();

    let settings = BenchmarkSettings {
        passenger_share: [(Location::Phoenix, 0.9375)].into_iter().collect(),
        ads_miles: [(Location::Phoenix, 31.159e6)].into_iter().collect(),
        ..Default::default()
    };
    let observations = ads_observations(&corpus, &settings.ads_miles);
    // Give the fleet side a plausible nonzero aggregate so comparisons run.
    let grid = sensitivity_grid(&corpus, &exposure, &cells, &observations, &settings, 0.05)
        .unwrap();

    let rows = |outcome: OutcomeLevel| -> Vec<_> {
        grid.iter()
            .filter(|r| {
                r.result.outcome == Some(outcome)
                    && r.result.crash_type.is_none()
                    && r.result.location == Some(Location::Phoenix)
            })
            .collect()
    };

    // Airbag rows are bit-identical across the underreporting toggle and
    // flagged accordingly.
    let airbag = rows(OutcomeLevel::AirbagDeployment);
    assert_eq!(airbag.len(), 4);
    for row in &airbag {
        assert_ne!(row.sensitivity, "flips");
        assert_eq!(row.sensitivity, "underreporting_insensitive");
    }

    // Any-injury benchmark divides by exactly 1.47 when the correction is
    // switched off, within each dynamic setting.
    let injury = rows(OutcomeLevel::AnyInjuryReported);
    for dynamic in [true, false] {
        let on = injury
            .iter()
            .find(|r| r.underreporting && r.dynamic == dynamic)
            .unwrap();
        let off = injury
            .iter()
            .find(|r| !r.underreporting && r.dynamic == dynamic)
            .unwrap();
        assert_eq!(
            on.result.human_rate_ipmm.to_bits(),
            (off.result.human_rate_ipmm * 1.47).to_bits()
        );
    }
}

#[test]
fn uniform_share_study_makes_dynamic_a_no_op() {
    // ADS mile shares equal to human mile shares in every cell: dynamic and
    // unadjusted benchmark rates must coincide.
    let scenario = Scenario {
        seed: 5,
        n_cells: 40,
        human_miles: 4.0e8,
        base_rate_ipmm: 1.8,
        rate_spread: 0.6,
        ads_miles: 2.0e7,
        ads_distribution: AdsDistribution::MatchHuman,
        true_ratio: 0.5,
    };
    let study = simulate(&scenario).unwrap();
    let corpus: Vec<_> = study
        .human_records
        .iter()
        .cloned()
        .map(|r| classify_record(r).unwrap())
        .collect();
    let location = Location::Other("Synthetic".to_string());
    let base = BenchmarkSettings {
        passenger_share: [(location.clone(), 1.0)].into_iter().collect(),
        ads_miles: [(location.clone(), scenario.ads_miles)].into_iter().collect(),
        underreporting: false,
        ..Default::default()
    };

    let run = |dynamic: bool| {
        let settings = BenchmarkSettings {
            dynamic,
            ..base.clone()
        };
        build_benchmarks(&corpus, &study.exposure, &study.cells, &settings).unwrap()
    };
    let with_dynamic = run(true);
    let without_dynamic = run(false);
    let key = BenchmarkKey {
        location: Some(location),
        outcome: OutcomeLevel::AnyInjuryReported,
        crash_type: None,
    };
    let a = with_dynamic[&key].rate;
    let b = without_dynamic[&key].rate;
    assert!(
        ((a - b) / b).abs() <= 1e-9,
        "dynamic {a} vs unadjusted {b}"
    );
}

#[test]
fn compare_gap_report_lists_unmatched_cells() {
    let benchmarks = fixture_benchmarks();
    // An observation map that lacks most cells produces gaps, not silence.
    let mut observations: BTreeMap<BenchmarkKey, AdsObservation> = BTreeMap::new();
    let first_key = benchmarks.keys().next().unwrap().clone();
    observations.insert(
        first_key,
        AdsObservation {
            count: 1.0,
            miles: 1.0e6,
        },
    );
    let comparison = crashbench_core::stats::compare(&observations, &benchmarks, 0.05).unwrap();
    assert_eq!(
        comparison.results.len() + comparison.gaps.len(),
        benchmarks.len()
    );
    assert!(!comparison.gaps.is_empty());
}
