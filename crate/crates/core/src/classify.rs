//! Crash-type, outcome-level, and pre-crash-movement classification.
//!
//! All functions here are pure and total over valid records, so
//! classification is idempotent and embarrassingly parallel.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    BodyClass, Configuration, CrashGroup, CrashRecord, CrashType, OutcomeLevel,
    PreCrashKinematics,
};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("pre-crash kinematics must be non-negative: stopped {stopped}s, peak deceleration {decel} m/s^2")]
    NegativeKinematics { stopped: f64, decel: f64 },
}

/// Deceleration below which the subject counts as holding constant speed
/// (or accelerating) over the five-second pre-crash window, m/s².
pub const CONSTANT_SPEED_DECEL_MPS2: f64 = 0.75;
/// Boundary between moderate and hard braking, m/s². The boundary value
/// itself belongs to the harder category.
pub const HARD_BRAKING_DECEL_MPS2: f64 = 3.5;
/// Minimum stationary time to count as stopped, seconds.
pub const STOPPED_THRESHOLD_S: f64 = 5.0;

/// Subject movement over the five seconds before first contact.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum PreCrashMovement {
    Stopped5s,
    ConstantOrAccelerating,
    ModerateBraking,
    HardBraking,
}

impl PreCrashMovement {
    pub fn as_str(self) -> &'static str {
        match self {
            PreCrashMovement::Stopped5s => "stopped_5s",
            PreCrashMovement::ConstantOrAccelerating => "constant_or_accelerating",
            PreCrashMovement::ModerateBraking => "moderate_braking",
            PreCrashMovement::HardBraking => "hard_braking",
        }
    }
}

impl std::str::FromStr for PreCrashMovement {
    type Err = crate::model::ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "stopped_5s" => PreCrashMovement::Stopped5s,
            "constant_or_accelerating" => PreCrashMovement::ConstantOrAccelerating,
            "moderate_braking" => PreCrashMovement::ModerateBraking,
            "hard_braking" => PreCrashMovement::HardBraking,
            _ => {
                return Err(crate::model::ModelError::UnknownToken {
                    what: "pre-crash movement",
                    token: s.to_string(),
                })
            }
        })
    }
}

/// Assigns the crash-type group.
///
/// Precedence: secondary involvement first, then vulnerable-road-user
/// partner, then single-vehicle, then vehicle-to-vehicle geometry, then
/// other. Secondary-first is what puts a vehicle struck by a previously
/// crashed partner (a riderless motorcycle, a pushed car) in the secondary
/// group regardless of the partner's body type.
pub fn classify_crash_type(record: &CrashRecord) -> CrashType {
    if record.sequence_position > 1 {
        return CrashType::new(CrashGroup::SecondaryCrash);
    }
    if let Some(partner) = &record.partner {
        match partner.body_class {
            BodyClass::Pedestrian => return CrashType::new(CrashGroup::Pedestrian),
            BodyClass::Cyclist => return CrashType::new(CrashGroup::Cyclist),
            BodyClass::Motorcycle => return CrashType::new(CrashGroup::Motorcycle),
            BodyClass::FixedObjectOrGround => return CrashType::new(CrashGroup::SingleVehicle),
            _ => {}
        }
    } else {
        return CrashType::new(CrashGroup::SingleVehicle);
    }
    match record.configuration {
        Configuration::Backing => CrashType::new(CrashGroup::V2VBacking),
        Configuration::FrontToRear => CrashType {
            group: CrashGroup::V2VF2R,
            f2r_role: record.annotations.f2r_role,
        },
        Configuration::OppositeDirection => CrashType::new(CrashGroup::V2VOppositeDirection),
        Configuration::IntersectionTurningOrCrossing => {
            CrashType::new(CrashGroup::V2VIntersection)
        }
        Configuration::LateralSameDirection => CrashType::new(CrashGroup::V2VLateral),
        // Dooring, unknown, and unmatched geometries land here.
        Configuration::SingleVehicle | Configuration::OtherOrUnknown => {
            if record.configuration == Configuration::SingleVehicle {
                CrashType::new(CrashGroup::SingleVehicle)
            } else {
                CrashType::new(CrashGroup::Other)
            }
        }
    }
}

/// Outcome levels met by a record, classified at the crash level over all
/// parties.
///
/// An impacted in-transport record always meets the any-property-damage
/// level. Suspected serious requires a police-confirmed K or A injury and so
/// implies any-injury-reported.
pub fn classify_outcomes(record: &CrashRecord) -> BTreeSet<OutcomeLevel> {
    let mut outcomes = BTreeSet::new();
    outcomes.insert(OutcomeLevel::AnyPropertyDamageOrInjury);
    if record.severity.police_reported {
        outcomes.insert(OutcomeLevel::PoliceReported);
    }
    if record.severity.max_injury.is_injury() {
        outcomes.insert(OutcomeLevel::AnyInjuryReported);
    }
    if record.severity.any_airbag_any_vehicle {
        outcomes.insert(OutcomeLevel::AirbagDeployment);
    }
    if record.severity.police_confirmed_serious == Some(true) {
        outcomes.insert(OutcomeLevel::SuspectedSeriousInjuryPlus);
    }
    outcomes
}

/// Pre-crash movement category from the five-second window kinematics.
///
/// The 0.75 and 3.5 m/s² thresholds are half-open with the boundary in the
/// higher-braking category.
pub fn classify_pre_crash_movement(
    kinematics: PreCrashKinematics,
) -> Result<PreCrashMovement, ClassifyError> {
    let PreCrashKinematics {
        stopped_duration_s: stopped,
        peak_deceleration_mps2: decel,
    } = kinematics;
    if stopped < 0.0 || decel < 0.0 || !stopped.is_finite() || !decel.is_finite() {
        return Err(ClassifyError::NegativeKinematics { stopped, decel });
    }
    Ok(if stopped >= STOPPED_THRESHOLD_S {
        PreCrashMovement::Stopped5s
    } else if decel < CONSTANT_SPEED_DECEL_MPS2 {
        PreCrashMovement::ConstantOrAccelerating
    } else if decel < HARD_BRAKING_DECEL_MPS2 {
        PreCrashMovement::ModerateBraking
    } else {
        PreCrashMovement::HardBraking
    })
}

/// A record with its classification attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedRecord {
    pub record: CrashRecord,
    pub crash_type: CrashType,
    pub outcomes: BTreeSet<OutcomeLevel>,
    pub pre_crash_movement: Option<PreCrashMovement>,
}

/// Classifies one record on every axis.
pub fn classify_record(record: CrashRecord) -> Result<ClassifiedRecord, ClassifyError> {
    let crash_type = classify_crash_type(&record);
    let outcomes = classify_outcomes(&record);
    let pre_crash_movement = record
        .annotations
        .pre_crash_kinematics
        .map(classify_pre_crash_movement)
        .transpose()?;
    Ok(ClassifiedRecord {
        record,
        crash_type,
        outcomes,
        pre_crash_movement,
    })
}
