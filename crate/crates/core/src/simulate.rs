//! Seeded synthetic-data generation with known ground truth.
//!
//! A scenario fixes a cell grid, per-cell human rates, human and ADS mile
//! distributions, and a true rate ratio; sampling then draws Poisson crash
//! counts and materializes corpora the real pipeline can consume, plus a
//! truth record. Everything is driven by a ChaCha20 stream cipher RNG, so
//! identical seeds give identical output on every platform.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::CellMileageRow;
use crate::model::{
    Actor, Annotations, BodyClass, CellId, Configuration, CrashRecord, ExposureRow,
    ExposureTable, InjurySeverity, Location, OutcomeLevel, RoadClass, Severity, VehicleClass,
};

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("{what} must lie in [0, 1), got {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("scenario needs at least one cell")]
    NoCells,
}

/// How ADS miles distribute over the cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AdsDistribution {
    /// ADS mile shares equal the human mile shares; dynamic and unadjusted
    /// benchmarks then coincide.
    MatchHuman,
    /// ADS miles concentrate toward the high-rate end of the grid; larger
    /// skew means stronger concentration.
    Concentrated { skew: f64 },
}

/// A fully specified synthetic study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub n_cells: u32,
    /// Total human miles, split uniformly over cells.
    pub human_miles: f64,
    /// Pooled human rate in IPMM; per-cell rates spread around this.
    pub base_rate_ipmm: f64,
    /// Relative per-cell rate spread in [0, 1): cell rates run linearly
    /// from `base * (1 - spread)` to `base * (1 + spread)`.
    pub rate_spread: f64,
    pub ads_miles: f64,
    pub ads_distribution: AdsDistribution,
    /// True ratio of the ADS rate to the dynamic (ADS-mile-weighted)
    /// human rate.
    pub true_ratio: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimulateError> {
        if self.n_cells == 0 {
            return Err(SimulateError::NoCells);
        }
        for (what, value) in [
            ("human_miles", self.human_miles),
            ("base_rate_ipmm", self.base_rate_ipmm),
            ("ads_miles", self.ads_miles),
            ("true_ratio", self.true_ratio),
        ] {
            if value <= 0.0 || !value.is_finite() {
                return Err(SimulateError::NonPositive { what, value });
            }
        }
        if !(0.0..1.0).contains(&self.rate_spread) {
            return Err(SimulateError::OutOfRange {
                what: "rate_spread",
                value: self.rate_spread,
            });
        }
        if let AdsDistribution::Concentrated { skew } = self.ads_distribution {
            if !skew.is_finite() || skew < 0.0 {
                return Err(SimulateError::NonPositive {
                    what: "skew",
                    value: skew,
                });
            }
        }
        Ok(())
    }

    /// True per-cell rates, IPMM.
    fn cell_rates(&self) -> Vec<f64> {
        let n = self.n_cells as usize;
        (0..n)
            .map(|i| {
                let t = if n == 1 {
                    0.0
                } else {
                    2.0 * i as f64 / (n as f64 - 1.0) - 1.0
                };
                self.base_rate_ipmm * (1.0 + self.rate_spread * t)
            })
            .collect()
    }

    fn ads_shares(&self) -> Vec<f64> {
        let n = self.n_cells as usize;
        match self.ads_distribution {
            AdsDistribution::MatchHuman => vec![1.0 / n as f64; n],
            AdsDistribution::Concentrated { skew } => {
                let weights: Vec<f64> = (0..n)
                    .map(|i| {
                        let t = if n == 1 { 1.0 } else { i as f64 / (n as f64 - 1.0) };
                        (skew * t).exp()
                    })
                    .collect();
                let total: f64 = weights.iter().sum();
                weights.into_iter().map(|w| w / total).collect()
            }
        }
    }

    /// The dynamic benchmark rate implied by the true cell rates and the
    /// ADS mile distribution; the ADS true rate is `true_ratio` times this.
    pub fn true_dynamic_rate(&self) -> f64 {
        self.cell_rates()
            .iter()
            .zip(self.ads_shares())
            .map(|(rate, share)| rate * share)
            .sum()
    }
}

/// Ground truth recorded beside every synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub true_ratio: f64,
    pub human_pooled_rate_ipmm: f64,
    pub human_dynamic_rate_ipmm: f64,
    pub ads_true_rate_ipmm: f64,
    pub expected_human_count: f64,
    pub expected_ads_count: f64,
    pub sampled_human_count: u64,
    pub sampled_ads_count: u64,
}

/// A sampled study: corpora, exposure, cell table, and the truth record.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedStudy {
    pub human_records: Vec<CrashRecord>,
    pub ads_records: Vec<CrashRecord>,
    pub exposure: ExposureTable,
    pub cells: Vec<CellMileageRow>,
    pub truth: Truth,
}

fn poisson_draw(rng: &mut ChaCha20Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive lambda").sample(rng) as u64
}

const SYNTHETIC_LOCATION: &str = "Synthetic";

fn synthetic_record(prefix: &str, index: u64, injured: bool) -> CrashRecord {
    CrashRecord {
        crash_id: format!("{prefix}-{index:06}"),
        subject: Actor {
            body_class: BodyClass::PassengerVehicle,
            role_order: 1,
            in_transport: true,
        },
        partner: Some(Actor {
            body_class: BodyClass::PassengerVehicle,
            role_order: 2,
            in_transport: true,
        }),
        location: Location::Other(SYNTHETIC_LOCATION.to_string()),
        coordinates: None,
        road_class: RoadClass::SurfaceStreet,
        sequence_position: 1,
        configuration: Configuration::OtherOrUnknown,
        severity: Severity {
            max_injury: if injured {
                InjurySeverity::C
            } else {
                InjurySeverity::None
            },
            any_airbag_any_vehicle: false,
            police_reported: true,
            police_confirmed_serious: None,
        },
        annotations: Annotations::default(),
        weight: 1.0,
    }
}

/// Samples one study from a scenario. Deterministic given the seed.
///
/// Human crashes are drawn per cell from the true cell rates; ADS crashes
/// are drawn from `true_ratio` times the dynamic benchmark rate. All
/// sampled crashes carry the any-injury outcome.
pub fn simulate(scenario: &Scenario) -> Result<SimulatedStudy, SimulateError> {
    scenario.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(scenario.seed);

    let n = scenario.n_cells as usize;
    let cell_miles = scenario.human_miles / n as f64;
    let rates = scenario.cell_rates();
    let ads_shares = scenario.ads_shares();

    let mut cells = Vec::with_capacity(n);
    let mut human_count = 0u64;
    for (i, (&rate, &share)) in rates.iter().zip(&ads_shares).enumerate() {
        let crashes = poisson_draw(&mut rng, rate * cell_miles / 1.0e6);
        human_count += crashes;
        let mut human_crashes = BTreeMap::new();
        human_crashes.insert(OutcomeLevel::AnyPropertyDamageOrInjury, crashes as f64);
        human_crashes.insert(OutcomeLevel::PoliceReported, crashes as f64);
        human_crashes.insert(OutcomeLevel::AnyInjuryReported, crashes as f64);
        cells.push(CellMileageRow {
            location: Location::Other(SYNTHETIC_LOCATION.to_string()),
            cell: CellId(format!("sim:{i:04}")),
            human_miles: cell_miles,
            human_crashes,
            ads_miles: scenario.ads_miles * share,
        });
    }

    let dynamic_rate = scenario.true_dynamic_rate();
    let ads_lambda = scenario.true_ratio * dynamic_rate * scenario.ads_miles / 1.0e6;
    let ads_count = poisson_draw(&mut rng, ads_lambda);

    let human_records: Vec<CrashRecord> = (0..human_count)
        .map(|i| synthetic_record("sim-h", i, true))
        .collect();
    let ads_records: Vec<CrashRecord> = (0..ads_count)
        .map(|i| synthetic_record("sim-a", i, true))
        .collect();

    let exposure = ExposureTable {
        rows: vec![ExposureRow {
            location: Location::Other(SYNTHETIC_LOCATION.to_string()),
            road_class: RoadClass::SurfaceStreet,
            vehicle_class: VehicleClass::All,
            cell: None,
            miles: scenario.human_miles,
        }],
    };

    Ok(SimulatedStudy {
        human_records,
        ads_records,
        exposure,
        cells,
        truth: Truth {
            true_ratio: scenario.true_ratio,
            human_pooled_rate_ipmm: scenario.base_rate_ipmm,
            human_dynamic_rate_ipmm: dynamic_rate,
            ads_true_rate_ipmm: scenario.true_ratio * dynamic_rate,
            expected_human_count: scenario.base_rate_ipmm * scenario.human_miles / 1.0e6,
            expected_ads_count: ads_lambda,
            sampled_human_count: human_count,
            sampled_ads_count: ads_count,
        },
    })
}

/// One coverage replicate: draws the two Poisson counts of a two-sample
/// study with a known rate ratio and reports whether the exact interval
/// covered it. Returns `None` when both draws are zero (no comparison).
pub fn coverage_replicate(
    rng: &mut ChaCha20Rng,
    true_ratio: f64,
    ads_lambda: f64,
    human_lambda: f64,
    t_a: f64,
    t_b: f64,
    alpha: f64,
) -> Option<bool> {
    let x_a = poisson_draw(rng, ads_lambda) as f64;
    let x_b = poisson_draw(rng, human_lambda) as f64;
    if x_a + x_b == 0.0 {
        return None;
    }
    let result = crate::stats::rate_ratio_ci(x_a, t_a, x_b, t_b, alpha).ok()?;
    let lower_ratio = result.ci_lower / 100.0 + 1.0;
    let upper_ratio = result
        .ci_upper
        .as_finite()
        .map(|u| u / 100.0 + 1.0)
        .unwrap_or(f64::INFINITY);
    Some(lower_ratio <= true_ratio && true_ratio <= upper_ratio)
}

/// Seeded RNG for simulation entry points.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Draws from a seeded stream; exposed for scenario-level jitter in tests.
pub fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scenario() -> Scenario {
        Scenario {
            seed: 7,
            n_cells: 20,
            human_miles: 5.0e8,
            base_rate_ipmm: 2.0,
            rate_spread: 0.5,
            ads_miles: 3.0e7,
            ads_distribution: AdsDistribution::Concentrated { skew: 2.0 },
            true_ratio: 0.25,
        }
    }

    #[test]
    fn identical_seeds_give_identical_output() {
        let a = simulate(&scenario()).unwrap();
        let b = simulate(&scenario()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let a = simulate(&scenario()).unwrap();
        let b = simulate(&Scenario {
            seed: 8,
            ..scenario()
        })
        .unwrap();
        assert_ne!(
            a.truth.sampled_human_count,
            b.truth.sampled_human_count
        );
    }

    #[test]
    fn match_human_shares_make_dynamic_equal_pooled() {
        let s = Scenario {
            ads_distribution: AdsDistribution::MatchHuman,
            ..scenario()
        };
        assert_relative_eq!(
            s.true_dynamic_rate(),
            s.base_rate_ipmm,
            max_relative = 1e-9
        );
    }

    #[test]
    fn concentrated_shares_raise_the_dynamic_rate() {
        let s = scenario();
        assert!(s.true_dynamic_rate() > s.base_rate_ipmm);
    }

    #[test]
    fn invalid_scenarios_rejected() {
        assert!(Scenario {
            base_rate_ipmm: 0.0,
            ..scenario()
        }
        .validate()
        .is_err());
        assert!(Scenario {
            n_cells: 0,
            ..scenario()
        }
        .validate()
        .is_err());
        assert!(Scenario {
            rate_spread: 1.0,
            ..scenario()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn cell_table_is_consistent_with_truth() {
        let study = simulate(&scenario()).unwrap();
        let total: f64 = study
            .cells
            .iter()
            .map(|c| c.crashes(OutcomeLevel::AnyInjuryReported))
            .sum();
        assert_eq!(total as u64, study.truth.sampled_human_count);
        assert_eq!(study.human_records.len() as u64, study.truth.sampled_human_count);
        let ads_total: f64 = study.cells.iter().map(|c| c.ads_miles).sum();
        assert_relative_eq!(ads_total, 3.0e7, max_relative = 1e-12);
    }
}
