//! Property tests for the spec-level invariants.

use std::collections::BTreeSet;

use proptest::prelude::*;

use crashbench_core::benchmark::{dynamic_reweight, CellObservation, ZeroMilePolicy};
use crashbench_core::classify::{classify_outcomes, classify_record};
use crashbench_core::ingest::{read_records, write_records};
use crashbench_core::model::{
    Actor, Annotations, BodyClass, CellId, Configuration, CrashGroup, CrashRecord, F2rRole,
    InitiatorRole, InjurySeverity, Location, OutcomeLevel, PreCrashKinematics, RoadClass,
    Severity,
};
use crashbench_core::stats::clopper_pearson;

fn body_class() -> impl Strategy<Value = BodyClass> {
    prop_oneof![
        Just(BodyClass::PassengerVehicle),
        Just(BodyClass::Motorcycle),
        Just(BodyClass::Cyclist),
        Just(BodyClass::Pedestrian),
        Just(BodyClass::HeavyVehicle),
        Just(BodyClass::FixedObjectOrGround),
        Just(BodyClass::UnknownVehicle),
    ]
}

fn configuration() -> impl Strategy<Value = Configuration> {
    prop_oneof![
        Just(Configuration::Backing),
        Just(Configuration::FrontToRear),
        Just(Configuration::OppositeDirection),
        Just(Configuration::IntersectionTurningOrCrossing),
        Just(Configuration::LateralSameDirection),
        Just(Configuration::SingleVehicle),
        Just(Configuration::OtherOrUnknown),
    ]
}

fn location() -> impl Strategy<Value = Location> {
    prop_oneof![
        Just(Location::Phoenix),
        Just(Location::SanFrancisco),
        Just(Location::LosAngeles),
        Just(Location::Austin),
        "[a-z ]{1,12}".prop_map(Location::Other),
    ]
}

fn injury() -> impl Strategy<Value = InjurySeverity> {
    prop_oneof![
        Just(InjurySeverity::None),
        Just(InjurySeverity::C),
        Just(InjurySeverity::B),
        Just(InjurySeverity::A),
        Just(InjurySeverity::K),
        Just(InjurySeverity::UnknownWithInjuryAllegation),
    ]
}

prop_compose! {
    fn crash_record()(
        crash_id in "[ -~]{1,24}",
        subject_body in body_class(),
        partner in proptest::option::of(body_class()),
        location in location(),
        coordinates in proptest::option::of((-90.0f64..=90.0, -180.0f64..=180.0)),
        road_class in prop_oneof![
            Just(RoadClass::SurfaceStreet),
            Just(RoadClass::FreewayOrInterstate),
            Just(RoadClass::Unknown)
        ],
        sequence_position in 1u32..4,
        configuration in configuration(),
        max_injury in injury(),
        any_airbag in any::<bool>(),
        police_reported in any::<bool>(),
        confirm_serious in any::<Option<bool>>(),
        initiator in proptest::option::of(prop_oneof![
            Just(InitiatorRole::Initiator),
            Just(InitiatorRole::Responder),
            Just(InitiatorRole::Unknown)
        ]),
        f2r_role in proptest::option::of(prop_oneof![
            Just(F2rRole::Striking), Just(F2rRole::Struck)
        ]),
        kinematics in proptest::option::of((0.0f64..30.0, 0.0f64..9.0)),
        weight in 0.0f64..=1.0,
    ) -> CrashRecord {
        // Keep the severity invariant satisfiable: confirmation of a serious
        // injury is only attached to eligible severities.
        let police_confirmed_serious = match confirm_serious {
            Some(true) if max_injury.is_serious_eligible() => Some(true),
            Some(_) => Some(false),
            None => None,
        };
        CrashRecord {
            crash_id,
            subject: Actor {
                body_class: subject_body,
                role_order: 1,
                in_transport: true,
            },
            partner: partner.map(|body_class| Actor {
                body_class,
                role_order: 2,
                in_transport: true,
            }),
            location,
            coordinates,
            road_class,
            sequence_position,
            configuration,
            severity: Severity {
                max_injury,
                any_airbag_any_vehicle: any_airbag,
                police_reported,
                police_confirmed_serious,
            },
            annotations: Annotations {
                initiator_role: initiator,
                f2r_role,
                pre_crash_kinematics: kinematics.map(|(stopped, decel)| PreCrashKinematics {
                    stopped_duration_s: stopped,
                    peak_deceleration_mps2: decel,
                }),
            },
            weight,
        }
    }
}

proptest! {
    /// Write-then-read over the canonical CSV is the identity.
    #[test]
    fn canonical_round_trip(records in proptest::collection::vec(crash_record(), 0..20)) {
        let file = tempfile::NamedTempFile::new().unwrap();
        write_records(file.path(), &records).unwrap();
        let back = read_records(file.path()).unwrap();
        prop_assert_eq!(records, back);
    }

    /// Every record lands in exactly one crash-type group, and reclassifying
    /// reproduces the same labels.
    #[test]
    fn classification_partitions_and_is_idempotent(
        records in proptest::collection::vec(crash_record(), 1..40)
    ) {
        let total = records.len();
        let mut by_group: std::collections::BTreeMap<CrashGroup, usize> = Default::default();
        for record in &records {
            let classified = classify_record(record.clone()).unwrap();
            let again = classify_record(classified.record.clone()).unwrap();
            prop_assert_eq!(&classified, &again);
            *by_group.entry(classified.crash_type.group).or_default() += 1;
        }
        prop_assert_eq!(by_group.values().sum::<usize>(), total);
    }

    /// Severity lattice: suspected serious implies any-injury implies
    /// any-property-damage.
    #[test]
    fn outcome_lattice_holds(record in crash_record()) {
        let outcomes: BTreeSet<OutcomeLevel> = classify_outcomes(&record);
        if outcomes.contains(&OutcomeLevel::SuspectedSeriousInjuryPlus) {
            prop_assert!(outcomes.contains(&OutcomeLevel::AnyInjuryReported));
        }
        if outcomes.contains(&OutcomeLevel::AnyInjuryReported) {
            prop_assert!(outcomes.contains(&OutcomeLevel::AnyPropertyDamageOrInjury));
        }
    }

    /// Clopper-Pearson limits are nondecreasing in successes and bracket
    /// the point estimate.
    #[test]
    fn clopper_pearson_monotone_and_bracketing(
        n in 1u32..60,
        alpha in prop_oneof![Just(0.05f64), Just(0.01)],
    ) {
        let mut previous: Option<(f64, f64)> = None;
        for x in 0..=n {
            let limits = clopper_pearson(x as f64, n as f64, alpha).unwrap();
            prop_assert!(limits.lower <= x as f64 / n as f64 + 1e-12);
            prop_assert!(limits.upper >= x as f64 / n as f64 - 1e-12);
            if let Some((lower, upper)) = previous {
                prop_assert!(limits.lower >= lower - 1e-12);
                prop_assert!(limits.upper >= upper - 1e-12);
            }
            previous = Some((limits.lower, limits.upper));
        }
    }

    /// Lower/upper duality: the lower limit for x successes equals one minus
    /// the upper limit for the complementary count.
    #[test]
    fn clopper_pearson_duality(n in 1u32..50, x in 0u32..50) {
        prop_assume!(x <= n);
        let a = clopper_pearson(x as f64, n as f64, 0.05).unwrap();
        let b = clopper_pearson((n - x) as f64, n as f64, 0.05).unwrap();
        prop_assert!((a.lower - (1.0 - b.upper)).abs() < 1e-8);
    }

    /// Dynamic reweighting is invariant under uniform scaling of ADS miles
    /// and bounded by the visited cells' rates.
    #[test]
    fn dynamic_reweight_scaling_and_convexity(
        cells in proptest::collection::vec(
            (1.0e4f64..1.0e6, 0.0f64..50.0, 0.0f64..1.0e6), 1..30),
        scale in 0.5f64..2.0e3,
    ) {
        let observations: Vec<CellObservation> = cells
            .iter()
            .enumerate()
            .map(|(i, (miles, crashes, ads))| CellObservation {
                cell: CellId(format!("c{i}")),
                human_crashes: crashes.floor(),
                human_miles: *miles,
                ads_miles: *ads,
            })
            .collect();
        prop_assume!(observations.iter().map(|c| c.ads_miles).sum::<f64>() > 0.0);

        let base = dynamic_reweight(&observations, ZeroMilePolicy::Abort).unwrap();
        let scaled: Vec<CellObservation> = observations
            .iter()
            .map(|c| CellObservation { ads_miles: c.ads_miles * scale, ..c.clone() })
            .collect();
        let rescaled = dynamic_reweight(&scaled, ZeroMilePolicy::Abort).unwrap();
        prop_assert!((base.rate - rescaled.rate).abs() <= 1e-9 * base.rate.max(1.0));

        let visited: Vec<f64> = observations
            .iter()
            .filter(|c| c.ads_miles > 0.0)
            .map(|c| 1.0e6 * c.human_crashes / c.human_miles)
            .collect();
        let min = visited.iter().copied().fold(f64::INFINITY, f64::min);
        let max = visited.iter().copied().fold(0.0f64, f64::max);
        prop_assert!(base.rate >= min - 1e-9 && base.rate <= max + 1e-9);
    }

    /// When ADS mile shares equal human mile shares the reweighted rate is
    /// the pooled rate (checked against direct summation).
    #[test]
    fn dynamic_reweight_equal_shares_identity(
        cells in proptest::collection::vec((1.0e4f64..1.0e6, 0.0f64..50.0), 2..100),
        ratio in 0.01f64..10.0,
    ) {
        let observations: Vec<CellObservation> = cells
            .iter()
            .enumerate()
            .map(|(i, (miles, crashes))| CellObservation {
                cell: CellId(format!("c{i}")),
                human_crashes: crashes.floor(),
                human_miles: *miles,
                ads_miles: miles * ratio,
            })
            .collect();
        let pooled = 1.0e6 * observations.iter().map(|c| c.human_crashes).sum::<f64>()
            / observations.iter().map(|c| c.human_miles).sum::<f64>();
        let adjusted = dynamic_reweight(&observations, ZeroMilePolicy::Abort).unwrap();
        prop_assert!((adjusted.rate - pooled).abs() <= 1e-9 * pooled.max(1e-9));
    }
}
