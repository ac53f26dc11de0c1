//! Adjusted human benchmark rates.
//!
//! Classified human corpora plus exposure tables become benchmark rates in
//! incidents per million miles (IPMM) through up to three adjustments:
//!
//! * passenger-share adjustment of total mileage (state totals include all
//!   vehicle types; the passenger share comes from federal mileage tables),
//! * an underreporting correction applied to any-injury-reported counts
//!   only,
//! * spatial dynamic reweighting of per-cell rates toward the ADS fleet's
//!   mile distribution.
//!
//! Effective counts stay fractional through every adjustment; nothing is
//! rounded before statistics.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::ClassifiedRecord;
use crate::model::{CellId, CrashGroup, CrashType, ExposureTable, F2rRole, Location, OutcomeLevel};

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("miles must be positive, got {0}")]
    NonPositiveMiles(f64),
    #[error("count must be finite and non-negative, got {0}")]
    InvalidCount(f64),
    #[error("passenger share must lie in [0, 1], got {0}")]
    InvalidShare(f64),
    #[error("underreporting factor must be >= 1, got {0}")]
    InvalidFactor(f64),
    #[error("cells driven by the ADS have zero human miles: {}", cells.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", "))]
    ZeroHumanMileCells { cells: Vec<CellId> },
    #[error("no ADS miles in any cell; dynamic reweighting is undefined")]
    NoAdsMiles,
    #[error("blend inputs disagree on outcome or crash type")]
    MixedBlendInputs,
    #[error("blend requires at least one location with positive ADS miles")]
    EmptyBlend,
    #[error("no cell mileage rows for location '{0}' but dynamic adjustment is enabled")]
    MissingCells(Location),
    #[error("cell mileage for '{location}' sums to {cell_total} miles but the exposure table gives {exposure_total} (difference exceeds 0.1%)")]
    CellMileageMismatch {
        location: Location,
        cell_total: f64,
        exposure_total: f64,
    },
    #[error("no passenger share configured for location '{0}'")]
    MissingShare(Location),
    #[error("no ADS miles configured for location '{0}'")]
    MissingAdsMiles(Location),
}

/// An adjusted human crashed-vehicle rate.
///
/// Invariant: `rate == 1e6 * effective_count / exposure` to within 1e-9
/// relative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRate {
    pub location: Option<Location>,
    pub outcome: OutcomeLevel,
    /// `None` for the all-crash-type aggregate.
    pub crash_type: Option<CrashType>,
    /// Incidents per million miles.
    pub rate: f64,
    /// Possibly fractional after adjustment.
    pub effective_count: f64,
    /// Miles. Human exposure for unadjusted benchmarks; the ADS exposure of
    /// interest once dynamic reweighting or mileage blending has expressed
    /// the benchmark over the ADS driving distribution.
    pub exposure: f64,
    pub underreporting_applied: bool,
    pub dynamic_applied: bool,
}

/// Key for looking up a benchmark or comparison cell. `location: None`
/// denotes the mileage-blended all-locations entry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BenchmarkKey {
    pub location: Option<Location>,
    pub outcome: OutcomeLevel,
    pub crash_type: Option<CrashType>,
}

/// Incidents per million miles.
pub fn ipmm(count: f64, miles: f64) -> Result<f64, BenchmarkError> {
    if !count.is_finite() || count < 0.0 {
        return Err(BenchmarkError::InvalidCount(count));
    }
    if !miles.is_finite() || miles <= 0.0 {
        return Err(BenchmarkError::NonPositiveMiles(miles));
    }
    Ok(1.0e6 * count / miles)
}

/// Scales total mileage down to its passenger-vehicle portion.
pub fn passenger_adjust(total_miles: f64, passenger_share: f64) -> Result<f64, BenchmarkError> {
    if !(0.0..=1.0).contains(&passenger_share) {
        return Err(BenchmarkError::InvalidShare(passenger_share));
    }
    if !total_miles.is_finite() || total_miles < 0.0 {
        return Err(BenchmarkError::NonPositiveMiles(total_miles));
    }
    Ok(total_miles * passenger_share)
}

/// Applies the underreporting correction to a crash count.
///
/// Only any-injury-reported counts are corrected, and only when the switch
/// is on. Airbag-deployment and suspected-serious counts pass through
/// unchanged regardless: no data exists to estimate their underreporting.
pub fn underreporting_adjust(
    count: f64,
    outcome: OutcomeLevel,
    factor: f64,
    enabled: bool,
) -> Result<f64, BenchmarkError> {
    if factor < 1.0 || !factor.is_finite() {
        return Err(BenchmarkError::InvalidFactor(factor));
    }
    if !count.is_finite() || count < 0.0 {
        return Err(BenchmarkError::InvalidCount(count));
    }
    if enabled && outcome == OutcomeLevel::AnyInjuryReported {
        Ok(count * factor)
    } else {
        Ok(count)
    }
}

/// Expected-count difference: observed ADS count minus the count a driver
/// at the benchmark rate would accumulate over the same miles. Negative
/// means fewer ADS crashes than expected.
pub fn expected_count_delta(human_rate_ipmm: f64, ads_miles: f64, ads_count: f64) -> f64 {
    ads_count - human_rate_ipmm * ads_miles / 1.0e6
}

/// One cell's human observations and ADS miles.
#[derive(Debug, Clone, PartialEq)]
pub struct CellObservation {
    pub cell: CellId,
    pub human_crashes: f64,
    pub human_miles: f64,
    pub ads_miles: f64,
}

/// Per-cell shares and the reweighting multiplier applied to each cell.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CellWeights {
    pub cells: Vec<CellWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellWeight {
    pub cell: CellId,
    pub ads_mile_share: f64,
    pub human_mile_share: f64,
    /// `ads_mile_share / human_mile_share`; zero where the ADS drove no
    /// miles, so such cells drop out of the derived benchmark.
    pub weight: f64,
}

/// What to do when the ADS drove in a cell with no human miles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ZeroMilePolicy {
    /// Fail with the offending cell list.
    #[default]
    Abort,
    /// Substitute the region-wide unadjusted rate for that cell, logged.
    FallbackRegionRate,
}

/// Output of [`dynamic_reweight`]: the adjusted rate plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicRate {
    /// ADS-mile-share weighted average of per-cell human rates, IPMM.
    pub rate: f64,
    pub weights: CellWeights,
}

/// Reweights per-cell human rates by the ADS mile distribution.
///
/// `rate = sum_c (crashes_c / miles_c) * (ads_c / sum ads)`, in IPMM. Cells
/// where the ADS drove nothing contribute nothing; uniform scaling of all
/// ADS miles leaves the result unchanged.
pub fn dynamic_reweight(
    cells: &[CellObservation],
    policy: ZeroMilePolicy,
) -> Result<DynamicRate, BenchmarkError> {
    let ads_total: f64 = cells.iter().map(|c| c.ads_miles).sum();
    if ads_total <= 0.0 {
        return Err(BenchmarkError::NoAdsMiles);
    }
    let human_total: f64 = cells.iter().map(|c| c.human_miles).sum();

    let offenders: Vec<CellId> = cells
        .iter()
        .filter(|c| c.ads_miles > 0.0 && c.human_miles <= 0.0)
        .map(|c| c.cell.clone())
        .collect();
    let region_rate = if human_total > 0.0 {
        1.0e6 * cells.iter().map(|c| c.human_crashes).sum::<f64>() / human_total
    } else {
        0.0
    };
    if !offenders.is_empty() {
        match policy {
            ZeroMilePolicy::Abort => {
                return Err(BenchmarkError::ZeroHumanMileCells { cells: offenders })
            }
            ZeroMilePolicy::FallbackRegionRate => {
                log::warn!(
                    "{} cell(s) with ADS miles but no human miles; substituting the region-wide rate {:.4} IPMM",
                    offenders.len(),
                    region_rate
                );
            }
        }
    }

    let mut rate = 0.0;
    let mut weights = Vec::with_capacity(cells.len());
    for c in cells {
        let ads_share = c.ads_miles / ads_total;
        let human_share = if human_total > 0.0 {
            c.human_miles / human_total
        } else {
            0.0
        };
        let cell_rate = if c.human_miles > 0.0 {
            1.0e6 * c.human_crashes / c.human_miles
        } else {
            region_rate
        };
        rate += cell_rate * ads_share;
        let weight = if ads_share == 0.0 || human_share == 0.0 {
            0.0
        } else {
            ads_share / human_share
        };
        weights.push(CellWeight {
            cell: c.cell.clone(),
            ads_mile_share: ads_share,
            human_mile_share: human_share,
            weight,
        });
    }
    Ok(DynamicRate {
        rate,
        weights: CellWeights { cells: weights },
    })
}

/// Blends per-location benchmark rates with ADS miles as weights.
///
/// All inputs must share one outcome and crash type. The blended exposure is
/// the total ADS mileage, so the blended effective count is the expected
/// count over the ADS driving.
pub fn blend_locations(
    rates: &[(BenchmarkRate, f64)],
) -> Result<BenchmarkRate, BenchmarkError> {
    let included: Vec<&(BenchmarkRate, f64)> =
        rates.iter().filter(|(_, miles)| *miles > 0.0).collect();
    if included.is_empty() {
        return Err(BenchmarkError::EmptyBlend);
    }
    let first = &included[0].0;
    if included
        .iter()
        .any(|(r, _)| r.outcome != first.outcome || r.crash_type != first.crash_type)
    {
        return Err(BenchmarkError::MixedBlendInputs);
    }
    let total: f64 = included.iter().map(|(_, m)| m).sum();
    let rate: f64 = included
        .iter()
        .map(|(r, miles)| r.rate * miles / total)
        .sum();
    Ok(BenchmarkRate {
        location: None,
        outcome: first.outcome,
        crash_type: first.crash_type,
        rate,
        effective_count: rate * total / 1.0e6,
        exposure: total,
        underreporting_applied: included.iter().any(|(r, _)| r.underreporting_applied),
        dynamic_applied: included.iter().any(|(r, _)| r.dynamic_applied),
    })
}

/// One row of the cell-mileage table: human miles, human crashes per
/// outcome, and ADS miles for one cell of one location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMileageRow {
    pub location: Location,
    pub cell: CellId,
    pub human_miles: f64,
    pub human_crashes: BTreeMap<OutcomeLevel, f64>,
    pub ads_miles: f64,
}

impl CellMileageRow {
    pub fn crashes(&self, outcome: OutcomeLevel) -> f64 {
        self.human_crashes.get(&outcome).copied().unwrap_or(0.0)
    }
}

/// Inputs and switches for building a benchmark set.
#[derive(Debug, Clone)]
pub struct BenchmarkSettings {
    /// Passenger-vehicle share of total mileage, per location.
    pub passenger_share: BTreeMap<Location, f64>,
    /// ADS miles per location (exposure of interest).
    pub ads_miles: BTreeMap<Location, f64>,
    pub underreporting_factor: f64,
    pub underreporting: bool,
    pub dynamic: bool,
    pub zero_mile_policy: ZeroMilePolicy,
    /// Outcomes for which per-crash-type benchmarks are produced (the
    /// aggregate is always produced for every outcome).
    pub per_type_outcomes: BTreeSet<OutcomeLevel>,
}

impl Default for BenchmarkSettings {
    fn default() -> Self {
        BenchmarkSettings {
            passenger_share: BTreeMap::new(),
            ads_miles: BTreeMap::new(),
            underreporting_factor: 1.47,
            underreporting: true,
            dynamic: true,
            zero_mile_policy: ZeroMilePolicy::Abort,
            per_type_outcomes: [
                OutcomeLevel::AnyInjuryReported,
                OutcomeLevel::AirbagDeployment,
            ]
            .into_iter()
            .collect(),
        }
    }
}

/// Builds the full benchmark set from a classified human corpus, an
/// exposure table, and (when dynamic adjustment is on) cell mileage.
///
/// Produces, for every location with configured ADS miles and every outcome:
/// the aggregate benchmark, per-crash-type benchmarks for the configured
/// outcomes, front-to-rear striking/struck splits (each half the
/// front-to-rear rate), and mileage-blended all-location rows.
pub fn build_benchmarks(
    corpus: &[ClassifiedRecord],
    exposure: &ExposureTable,
    cells: &[CellMileageRow],
    settings: &BenchmarkSettings,
) -> Result<BTreeMap<BenchmarkKey, BenchmarkRate>, BenchmarkError> {
    let locations: Vec<Location> = settings.ads_miles.keys().cloned().collect();

    // Weighted counts per (location, outcome) and (location, outcome, group).
    let mut agg: BTreeMap<(Location, OutcomeLevel), f64> = BTreeMap::new();
    let mut by_type: BTreeMap<(Location, OutcomeLevel, CrashGroup), f64> = BTreeMap::new();
    for rec in corpus {
        for outcome in &rec.outcomes {
            let loc = rec.record.location.clone();
            *agg.entry((loc.clone(), *outcome)).or_default() += rec.record.weight;
            *by_type
                .entry((loc, *outcome, rec.crash_type.group))
                .or_default() += rec.record.weight;
        }
    }

    let mut out: BTreeMap<BenchmarkKey, BenchmarkRate> = BTreeMap::new();

    for location in &locations {
        let share = *settings
            .passenger_share
            .get(location)
            .ok_or_else(|| BenchmarkError::MissingShare(location.clone()))?;
        let ads_miles = *settings
            .ads_miles
            .get(location)
            .ok_or_else(|| BenchmarkError::MissingAdsMiles(location.clone()))?;
        let human_miles = passenger_adjust(exposure.surface_miles(location), share)?;
        if human_miles <= 0.0 {
            return Err(BenchmarkError::NonPositiveMiles(human_miles));
        }

        let loc_cells: Vec<&CellMileageRow> =
            cells.iter().filter(|c| &c.location == location).collect();
        if settings.dynamic {
            if loc_cells.is_empty() {
                return Err(BenchmarkError::MissingCells(location.clone()));
            }
            let cell_total: f64 = loc_cells.iter().map(|c| c.human_miles).sum();
            if (cell_total - human_miles).abs() > 1.0e-3 * human_miles {
                return Err(BenchmarkError::CellMileageMismatch {
                    location: location.clone(),
                    cell_total,
                    exposure_total: human_miles,
                });
            }
        }

        for outcome in OutcomeLevel::ALL {
            // Dynamic factor for this location and outcome, shared by the
            // aggregate and every crash type: the cell table carries crash
            // counts per outcome only.
            let dyn_factor = if settings.dynamic {
                let observations: Vec<CellObservation> = loc_cells
                    .iter()
                    .map(|c| CellObservation {
                        cell: c.cell.clone(),
                        human_crashes: c.crashes(outcome),
                        human_miles: c.human_miles,
                        ads_miles: c.ads_miles,
                    })
                    .collect();
                let adjusted = dynamic_reweight(&observations, settings.zero_mile_policy)?;
                let human_total: f64 = observations.iter().map(|c| c.human_miles).sum();
                let crash_total: f64 = observations.iter().map(|c| c.human_crashes).sum();
                if crash_total > 0.0 && human_total > 0.0 {
                    adjusted.rate / (1.0e6 * crash_total / human_total)
                } else {
                    1.0
                }
            } else {
                1.0
            };

            let mut emit = |crash_type: Option<CrashType>, count: f64| -> Result<(), BenchmarkError> {
                let rate = ipmm(count, human_miles)? * dyn_factor;
                let (exposure_miles, effective) = if settings.dynamic {
                    (ads_miles, rate * ads_miles / 1.0e6)
                } else {
                    (human_miles, rate * human_miles / 1.0e6)
                };
                out.insert(
                    BenchmarkKey {
                        location: Some(location.clone()),
                        outcome,
                        crash_type,
                    },
                    BenchmarkRate {
                        location: Some(location.clone()),
                        outcome,
                        crash_type,
                        rate,
                        effective_count: effective,
                        exposure: exposure_miles,
                        underreporting_applied: false,
                        dynamic_applied: settings.dynamic,
                    },
                );
                Ok(())
            };

            let total = agg
                .get(&(location.clone(), outcome))
                .copied()
                .unwrap_or(0.0);
            emit(None, total)?;

            if settings.per_type_outcomes.contains(&outcome) {
                for group in CrashGroup::ALL {
                    let count = by_type
                        .get(&(location.clone(), outcome, group))
                        .copied()
                        .unwrap_or(0.0);
                    emit(Some(CrashType::new(group)), count)?;
                    if group == CrashGroup::V2VF2R {
                        // Striking and struck each carry half the
                        // front-to-rear benchmark.
                        emit(Some(CrashType::f2r(F2rRole::Striking)), count / 2.0)?;
                        emit(Some(CrashType::f2r(F2rRole::Struck)), count / 2.0)?;
                    }
                }
            }
        }
    }

    // Mileage-blended all-location rows for every (outcome, crash type)
    // present at every included location.
    let keys: Vec<(OutcomeLevel, Option<CrashType>)> = out
        .keys()
        .map(|k| (k.outcome, k.crash_type))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    for (outcome, crash_type) in keys {
        let mut parts = Vec::new();
        for location in &locations {
            let key = BenchmarkKey {
                location: Some(location.clone()),
                outcome,
                crash_type,
            };
            if let Some(rate) = out.get(&key) {
                parts.push((rate.clone(), settings.ads_miles[location]));
            }
        }
        if parts.len() == locations.len() {
            let blended = blend_locations(&parts)?;
            out.insert(
                BenchmarkKey {
                    location: None,
                    outcome,
                    crash_type,
                },
                blended,
            );
        }
    }

    // The underreporting factor multiplies last, after blending, so
    // toggling it rescales every corrected rate (including the blended
    // rows) by exactly the factor and leaves the other outcomes
    // bit-identical.
    for (key, rate) in out.iter_mut() {
        let corrected = underreporting_adjust(
            rate.rate,
            key.outcome,
            settings.underreporting_factor,
            settings.underreporting,
        )?;
        if corrected != rate.rate {
            rate.rate = corrected;
            rate.effective_count = corrected * rate.exposure / 1.0e6;
        }
        rate.underreporting_applied =
            settings.underreporting && key.outcome == OutcomeLevel::AnyInjuryReported;
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cell(id: &str, crashes: f64, human: f64, ads: f64) -> CellObservation {
        CellObservation {
            cell: CellId(id.to_string()),
            human_crashes: crashes,
            human_miles: human,
            ads_miles: ads,
        }
    }

    #[test]
    fn ipmm_matches_published_aggregates() {
        // 24 events over 31.159M miles and 48 over 56.700M miles.
        assert!((ipmm(24.0, 31.159e6).unwrap() - 0.770).abs() < 5e-4);
        assert!((ipmm(48.0, 56.700e6).unwrap() - 0.847).abs() < 5e-4);
        assert_eq!(ipmm(0.0, 1.0e6).unwrap(), 0.0);
        assert!(ipmm(1.0, 0.0).is_err());
        assert!(ipmm(-1.0, 1.0).is_err());
    }

    #[test]
    fn passenger_adjust_is_a_plain_product() {
        assert_eq!(passenger_adjust(1.0e7, 1.0).unwrap(), 1.0e7);
        assert_eq!(passenger_adjust(1.0e7, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            passenger_adjust(2.5e7, 0.92).unwrap(),
            2.3e7,
            max_relative = 1e-12
        );
        assert!(passenger_adjust(1.0, 1.5).is_err());
        assert!(passenger_adjust(1.0, -0.1).is_err());
    }

    #[test]
    fn underreporting_only_touches_any_injury() {
        let f = 1.47;
        assert_relative_eq!(
            underreporting_adjust(100.0, OutcomeLevel::AnyInjuryReported, f, true).unwrap(),
            147.0,
            max_relative = 1e-12
        );
        assert_eq!(
            underreporting_adjust(100.0, OutcomeLevel::AirbagDeployment, f, true).unwrap(),
            100.0
        );
        assert_eq!(
            underreporting_adjust(100.0, OutcomeLevel::SuspectedSeriousInjuryPlus, f, true)
                .unwrap(),
            100.0
        );
        assert_eq!(
            underreporting_adjust(100.0, OutcomeLevel::AnyInjuryReported, f, false).unwrap(),
            100.0
        );
        assert!(underreporting_adjust(1.0, OutcomeLevel::AnyInjuryReported, 0.9, true).is_err());
    }

    #[test]
    fn expected_count_delta_signs() {
        assert_relative_eq!(
            expected_count_delta(2.09, 31.159e6, 24.0),
            -41.12,
            epsilon = 0.005
        );
        // Computed from the rounded published rate; the published table
        // shows -36.3 from the unrounded rate.
        assert_relative_eq!(
            expected_count_delta(1.42, 31.159e6, 8.0),
            -36.25,
            epsilon = 0.01
        );
        assert_eq!(expected_count_delta(0.0, 5.0e6, 0.0), 0.0);
    }

    #[test]
    fn reweight_is_a_convex_combination() {
        // Two cells at 1.0 and 3.0 IPMM with ADS miles split 75/25.
        let cells = [
            cell("a", 10.0, 10.0e6, 7.5e6),
            cell("b", 30.0, 10.0e6, 2.5e6),
        ];
        let adjusted = dynamic_reweight(&cells, ZeroMilePolicy::Abort).unwrap();
        assert_relative_eq!(adjusted.rate, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn reweight_degenerate_support_returns_that_cells_rate() {
        let cells = [cell("a", 12.0, 6.0e6, 4.0e6), cell("b", 99.0, 1.0e6, 0.0)];
        let adjusted = dynamic_reweight(&cells, ZeroMilePolicy::Abort).unwrap();
        assert_relative_eq!(adjusted.rate, 2.0, max_relative = 1e-12);
        let w = &adjusted.weights.cells[1];
        assert_eq!(w.weight, 0.0);
        assert_eq!(w.ads_mile_share, 0.0);
    }

    #[test]
    fn reweight_equal_shares_recovers_pooled_rate() {
        // Brute-force fixture: 100 cells with arbitrary rates; ADS shares
        // equal human shares, so the adjusted rate must equal the pooled
        // rate. The oracle is direct summation of counts and miles.
        let mut cells = Vec::new();
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for i in 0..100 {
            let miles = 1.0e5 + next() * 9.0e5;
            let crashes = (next() * 40.0).floor();
            cells.push(cell(&format!("c{i}"), crashes, miles, miles * 0.37));
        }
        let pooled = 1.0e6 * cells.iter().map(|c| c.human_crashes).sum::<f64>()
            / cells.iter().map(|c| c.human_miles).sum::<f64>();
        let adjusted = dynamic_reweight(&cells, ZeroMilePolicy::Abort).unwrap();
        assert_relative_eq!(adjusted.rate, pooled, max_relative = 1e-9);
    }

    #[test]
    fn reweight_invariant_under_uniform_ads_scaling() {
        let cells_a = [
            cell("a", 4.0, 2.0e6, 1.0e6),
            cell("b", 9.0, 3.0e6, 5.0e5),
            cell("c", 1.0, 1.0e6, 2.5e5),
        ];
        let cells_b: Vec<CellObservation> = cells_a
            .iter()
            .map(|c| CellObservation {
                ads_miles: c.ads_miles * 1000.0,
                ..c.clone()
            })
            .collect();
        let a = dynamic_reweight(&cells_a, ZeroMilePolicy::Abort).unwrap();
        let b = dynamic_reweight(&cells_b, ZeroMilePolicy::Abort).unwrap();
        assert_relative_eq!(a.rate, b.rate, max_relative = 1e-12);
    }

    #[test]
    fn reweight_zero_human_mile_policy() {
        let cells = [cell("a", 5.0, 5.0e6, 1.0e6), cell("hot", 0.0, 0.0, 1.0e6)];
        let err = dynamic_reweight(&cells, ZeroMilePolicy::Abort).unwrap_err();
        match err {
            BenchmarkError::ZeroHumanMileCells { cells } => {
                assert_eq!(cells, vec![CellId("hot".to_string())]);
            }
            other => panic!("unexpected error {other}"),
        }
        // Fallback substitutes the region-wide rate (1.0 IPMM here).
        let adjusted = dynamic_reweight(&cells, ZeroMilePolicy::FallbackRegionRate).unwrap();
        assert_relative_eq!(adjusted.rate, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn reweight_bounded_by_visited_cell_rates() {
        let cells = [
            cell("a", 8.0, 4.0e6, 3.0e6),
            cell("b", 3.0, 6.0e6, 1.0e6),
            cell("c", 50.0, 1.0e6, 0.0),
        ];
        let adjusted = dynamic_reweight(&cells, ZeroMilePolicy::Abort).unwrap();
        // Visited-cell rates are 2.0 and 0.5 IPMM; cell c is zero-weighted.
        assert!(adjusted.rate >= 0.5 && adjusted.rate <= 2.0);
    }

    fn bench(rate: f64, outcome: OutcomeLevel) -> BenchmarkRate {
        BenchmarkRate {
            location: Some(Location::Phoenix),
            outcome,
            crash_type: None,
            rate,
            effective_count: rate,
            exposure: 1.0e6,
            underreporting_applied: false,
            dynamic_applied: false,
        }
    }

    #[test]
    fn blend_matches_weighted_average_oracle() {
        let parts = [
            (bench(2.09, OutcomeLevel::AnyInjuryReported), 31.159e6),
            (bench(8.02, OutcomeLevel::AnyInjuryReported), 18.260e6),
        ];
        let blended = blend_locations(&parts).unwrap();
        // Direct weighted-average arithmetic.
        let expected = (2.09 * 31.159 + 8.02 * 18.260) / (31.159 + 18.260);
        assert_relative_eq!(blended.rate, expected, max_relative = 1e-12);
        assert!((blended.rate - 4.281).abs() < 1e-3);
        assert_relative_eq!(
            blended.effective_count,
            blended.rate * blended.exposure / 1.0e6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn blend_single_location_is_identity() {
        let parts = [(bench(1.5, OutcomeLevel::AirbagDeployment), 2.0e6)];
        let blended = blend_locations(&parts).unwrap();
        assert_relative_eq!(blended.rate, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn blend_of_equal_rates_is_that_rate() {
        let parts = [
            (bench(0.8, OutcomeLevel::AnyInjuryReported), 1.0e6),
            (bench(0.8, OutcomeLevel::AnyInjuryReported), 9.0e6),
            (bench(0.8, OutcomeLevel::AnyInjuryReported), 3.0e6),
        ];
        let blended = blend_locations(&parts).unwrap();
        assert_relative_eq!(blended.rate, 0.8, max_relative = 1e-12);
    }

    #[test]
    fn blend_rejects_mixed_cells() {
        let parts = [
            (bench(1.0, OutcomeLevel::AnyInjuryReported), 1.0e6),
            (bench(1.0, OutcomeLevel::AirbagDeployment), 1.0e6),
        ];
        assert!(matches!(
            blend_locations(&parts),
            Err(BenchmarkError::MixedBlendInputs)
        ));
    }
}
