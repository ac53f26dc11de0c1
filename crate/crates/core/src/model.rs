//! Canonical domain types shared by all pipeline stages.
//!
//! Everything here is an immutable value object with no I/O and no
//! statistics. String forms used in the canonical CSV formats live next to
//! the types they encode (`as_str` / `FromStr`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown {what} token '{token}'")]
    UnknownToken { what: &'static str, token: String },
    #[error("coordinate out of range: latitude {lat}, longitude {lon}")]
    CoordinateOutOfRange { lat: f64, lon: f64 },
    #[error("invalid record '{crash_id}': {reason}")]
    InvalidRecord { crash_id: String, reason: String },
}

/// Deployment area a record or exposure row belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Location {
    Phoenix,
    SanFrancisco,
    LosAngeles,
    Austin,
    Other(String),
}

impl Location {
    pub fn as_str(&self) -> &str {
        match self {
            Location::Phoenix => "Phoenix",
            Location::SanFrancisco => "San Francisco",
            Location::LosAngeles => "Los Angeles",
            Location::Austin => "Austin",
            Location::Other(name) => name,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Location {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "Phoenix" => Location::Phoenix,
            "San Francisco" => Location::SanFrancisco,
            "Los Angeles" => Location::LosAngeles,
            "Austin" => Location::Austin,
            "" => {
                return Err(ModelError::UnknownToken {
                    what: "location",
                    token: s.to_string(),
                })
            }
            other => Location::Other(other.to_string()),
        })
    }
}

/// Crash outcome levels, ordered from least to most severe threshold.
///
/// `SuspectedSeriousInjuryPlus` is a subset of `AnyInjuryReported`: a record
/// flagged serious must also be flagged any-injury.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum OutcomeLevel {
    AnyPropertyDamageOrInjury,
    PoliceReported,
    AnyInjuryReported,
    AirbagDeployment,
    SuspectedSeriousInjuryPlus,
}

impl OutcomeLevel {
    pub const ALL: [OutcomeLevel; 5] = [
        OutcomeLevel::AnyPropertyDamageOrInjury,
        OutcomeLevel::PoliceReported,
        OutcomeLevel::AnyInjuryReported,
        OutcomeLevel::AirbagDeployment,
        OutcomeLevel::SuspectedSeriousInjuryPlus,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeLevel::AnyPropertyDamageOrInjury => "any_property_damage_or_injury",
            OutcomeLevel::PoliceReported => "police_reported",
            OutcomeLevel::AnyInjuryReported => "any_injury_reported",
            OutcomeLevel::AirbagDeployment => "airbag_deployment",
            OutcomeLevel::SuspectedSeriousInjuryPlus => "suspected_serious_injury_plus",
        }
    }

    /// Human-readable label used in text reports.
    pub fn label(self) -> &'static str {
        match self {
            OutcomeLevel::AnyPropertyDamageOrInjury => "Any Property Damage or Injury",
            OutcomeLevel::PoliceReported => "Police-Reported",
            OutcomeLevel::AnyInjuryReported => "Any-Injury-Reported",
            OutcomeLevel::AirbagDeployment => "Airbag Deployment",
            OutcomeLevel::SuspectedSeriousInjuryPlus => "Suspected Serious Injury+",
        }
    }
}

impl fmt::Display for OutcomeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutcomeLevel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OutcomeLevel::ALL
            .iter()
            .copied()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| ModelError::UnknownToken {
                what: "outcome level",
                token: s.to_string(),
            })
    }
}

/// Role of the counted vehicle in a front-to-rear crash.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum F2rRole {
    Striking,
    Struck,
}

impl F2rRole {
    pub fn as_str(self) -> &'static str {
        match self {
            F2rRole::Striking => "striking",
            F2rRole::Struck => "struck",
        }
    }
}

impl FromStr for F2rRole {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "striking" => Ok(F2rRole::Striking),
            "struck" => Ok(F2rRole::Struck),
            _ => Err(ModelError::UnknownToken {
                what: "f2r role",
                token: s.to_string(),
            }),
        }
    }
}

/// The eleven crash-type groups. The groups partition classified records:
/// every record maps to exactly one group.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum CrashGroup {
    Cyclist,
    Motorcycle,
    Pedestrian,
    SecondaryCrash,
    SingleVehicle,
    V2VBacking,
    V2VF2R,
    V2VOppositeDirection,
    V2VIntersection,
    V2VLateral,
    Other,
}

impl CrashGroup {
    pub const ALL: [CrashGroup; 11] = [
        CrashGroup::Cyclist,
        CrashGroup::Motorcycle,
        CrashGroup::Pedestrian,
        CrashGroup::SecondaryCrash,
        CrashGroup::SingleVehicle,
        CrashGroup::V2VBacking,
        CrashGroup::V2VF2R,
        CrashGroup::V2VOppositeDirection,
        CrashGroup::V2VIntersection,
        CrashGroup::V2VLateral,
        CrashGroup::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CrashGroup::Cyclist => "cyclist",
            CrashGroup::Motorcycle => "motorcycle",
            CrashGroup::Pedestrian => "pedestrian",
            CrashGroup::SecondaryCrash => "secondary_crash",
            CrashGroup::SingleVehicle => "single_vehicle",
            CrashGroup::V2VBacking => "v2v_backing",
            CrashGroup::V2VF2R => "v2v_f2r",
            CrashGroup::V2VOppositeDirection => "v2v_opposite_direction",
            CrashGroup::V2VIntersection => "v2v_intersection",
            CrashGroup::V2VLateral => "v2v_lateral",
            CrashGroup::Other => "other",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CrashGroup::Cyclist => "Cyclist",
            CrashGroup::Motorcycle => "Motorcycle",
            CrashGroup::Pedestrian => "Pedestrian",
            CrashGroup::SecondaryCrash => "Secondary Crash",
            CrashGroup::SingleVehicle => "Single Vehicle",
            CrashGroup::V2VBacking => "V2V Backing",
            CrashGroup::V2VF2R => "V2V F2R",
            CrashGroup::V2VOppositeDirection => "V2V Opposite Direction",
            CrashGroup::V2VIntersection => "V2V Intersection",
            CrashGroup::V2VLateral => "V2V Lateral",
            CrashGroup::Other => "Other",
        }
    }
}

impl fmt::Display for CrashGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CrashGroup {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CrashGroup::ALL
            .iter()
            .copied()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| ModelError::UnknownToken {
                what: "crash group",
                token: s.to_string(),
            })
    }
}

/// A crash-type assignment: one of the eleven groups, with the striking or
/// struck role attached when (and only when) the group is front-to-rear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CrashType {
    pub group: CrashGroup,
    pub f2r_role: Option<F2rRole>,
}

impl CrashType {
    pub fn new(group: CrashGroup) -> Self {
        CrashType {
            group,
            f2r_role: None,
        }
    }

    pub fn f2r(role: F2rRole) -> Self {
        CrashType {
            group: CrashGroup::V2VF2R,
            f2r_role: Some(role),
        }
    }

    /// Holds the type invariant: a role is present iff the group is F2R.
    /// (An F2R crash whose role could not be determined carries no role.)
    pub fn is_valid(&self) -> bool {
        self.f2r_role.is_none() || self.group == CrashGroup::V2VF2R
    }
}

impl fmt::Display for CrashType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.f2r_role {
            Some(role) => write!(f, "{}_{}", self.group, role.as_str()),
            None => write!(f, "{}", self.group),
        }
    }
}

impl FromStr for CrashType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "v2v_f2r_striking" => Ok(CrashType::f2r(F2rRole::Striking)),
            "v2v_f2r_struck" => Ok(CrashType::f2r(F2rRole::Struck)),
            other => Ok(CrashType::new(other.parse()?)),
        }
    }
}

/// Body type of an involved party.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum BodyClass {
    PassengerVehicle,
    Motorcycle,
    Cyclist,
    Pedestrian,
    HeavyVehicle,
    FixedObjectOrGround,
    UnknownVehicle,
}

impl BodyClass {
    pub fn as_str(self) -> &'static str {
        match self {
            BodyClass::PassengerVehicle => "passenger_vehicle",
            BodyClass::Motorcycle => "motorcycle",
            BodyClass::Cyclist => "cyclist",
            BodyClass::Pedestrian => "pedestrian",
            BodyClass::HeavyVehicle => "heavy_vehicle",
            BodyClass::FixedObjectOrGround => "fixed_object_or_ground",
            BodyClass::UnknownVehicle => "unknown_vehicle",
        }
    }
}

impl fmt::Display for BodyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BodyClass {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "passenger_vehicle" => BodyClass::PassengerVehicle,
            "motorcycle" => BodyClass::Motorcycle,
            "cyclist" => BodyClass::Cyclist,
            "pedestrian" => BodyClass::Pedestrian,
            "heavy_vehicle" => BodyClass::HeavyVehicle,
            "fixed_object_or_ground" => BodyClass::FixedObjectOrGround,
            "unknown_vehicle" => BodyClass::UnknownVehicle,
            _ => {
                return Err(ModelError::UnknownToken {
                    what: "body class",
                    token: s.to_string(),
                })
            }
        })
    }
}

/// One involved party in a crash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actor {
    pub body_class: BodyClass,
    /// Position among involved parties; unique and contiguous from 1 within
    /// one crash.
    pub role_order: u32,
    pub in_transport: bool,
}

/// Functional road class of the crash or mileage location.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum RoadClass {
    SurfaceStreet,
    FreewayOrInterstate,
    Unknown,
}

impl RoadClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RoadClass::SurfaceStreet => "surface_street",
            RoadClass::FreewayOrInterstate => "freeway_or_interstate",
            RoadClass::Unknown => "unknown",
        }
    }
}

impl fmt::Display for RoadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoadClass {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "surface_street" => RoadClass::SurfaceStreet,
            "freeway_or_interstate" => RoadClass::FreewayOrInterstate,
            "unknown" => RoadClass::Unknown,
            _ => {
                return Err(ModelError::UnknownToken {
                    what: "road class",
                    token: s.to_string(),
                })
            }
        })
    }
}

/// Geometric configuration of the first contact involving the subject.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum Configuration {
    Backing,
    FrontToRear,
    OppositeDirection,
    IntersectionTurningOrCrossing,
    LateralSameDirection,
    SingleVehicle,
    OtherOrUnknown,
}

impl Configuration {
    pub fn as_str(self) -> &'static str {
        match self {
            Configuration::Backing => "backing",
            Configuration::FrontToRear => "front_to_rear",
            Configuration::OppositeDirection => "opposite_direction",
            Configuration::IntersectionTurningOrCrossing => "intersection_turning_or_crossing",
            Configuration::LateralSameDirection => "lateral_same_direction",
            Configuration::SingleVehicle => "single_vehicle",
            Configuration::OtherOrUnknown => "other_or_unknown",
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Configuration {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "backing" => Configuration::Backing,
            "front_to_rear" => Configuration::FrontToRear,
            "opposite_direction" => Configuration::OppositeDirection,
            "intersection_turning_or_crossing" => Configuration::IntersectionTurningOrCrossing,
            "lateral_same_direction" => Configuration::LateralSameDirection,
            "single_vehicle" => Configuration::SingleVehicle,
            "other_or_unknown" => Configuration::OtherOrUnknown,
            _ => {
                return Err(ModelError::UnknownToken {
                    what: "configuration",
                    token: s.to_string(),
                })
            }
        })
    }
}

/// Police injury ladder (KABCO), extended with an explicit state for
/// "severity unknown but an injury of unknown severity was alleged".
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum InjurySeverity {
    None,
    C,
    B,
    A,
    K,
    UnknownWithInjuryAllegation,
}

impl InjurySeverity {
    pub fn as_str(self) -> &'static str {
        match self {
            InjurySeverity::None => "none",
            InjurySeverity::C => "C",
            InjurySeverity::B => "B",
            InjurySeverity::A => "A",
            InjurySeverity::K => "K",
            InjurySeverity::UnknownWithInjuryAllegation => "unknown_with_injury_allegation",
        }
    }

    /// True when any level of injury was reported or alleged.
    pub fn is_injury(self) -> bool {
        self != InjurySeverity::None
    }

    /// True for the severities eligible for police confirmation as serious.
    pub fn is_serious_eligible(self) -> bool {
        matches!(self, InjurySeverity::A | InjurySeverity::K)
    }
}

impl fmt::Display for InjurySeverity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InjurySeverity {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "none" => InjurySeverity::None,
            "C" => InjurySeverity::C,
            "B" => InjurySeverity::B,
            "A" => InjurySeverity::A,
            "K" => InjurySeverity::K,
            "unknown_with_injury_allegation" => InjurySeverity::UnknownWithInjuryAllegation,
            _ => {
                return Err(ModelError::UnknownToken {
                    what: "injury severity",
                    token: s.to_string(),
                })
            }
        })
    }
}

/// Per-crash outcome maxima over all involved parties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Severity {
    pub max_injury: InjurySeverity,
    /// Any airbag deployed in any vehicle in the collision sequence.
    pub any_airbag_any_vehicle: bool,
    pub police_reported: bool,
    /// Set only from a police-report review; `Some(true)` requires
    /// `max_injury` of A or K.
    pub police_confirmed_serious: Option<bool>,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum InitiatorRole {
    Initiator,
    Responder,
    Unknown,
}

impl InitiatorRole {
    pub fn as_str(self) -> &'static str {
        match self {
            InitiatorRole::Initiator => "initiator",
            InitiatorRole::Responder => "responder",
            InitiatorRole::Unknown => "unknown",
        }
    }
}

impl FromStr for InitiatorRole {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "initiator" => InitiatorRole::Initiator,
            "responder" => InitiatorRole::Responder,
            "unknown" => InitiatorRole::Unknown,
            _ => {
                return Err(ModelError::UnknownToken {
                    what: "initiator role",
                    token: s.to_string(),
                })
            }
        })
    }
}

/// Subject kinematics over the five seconds before first contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreCrashKinematics {
    /// Seconds the subject had been stopped at first contact.
    pub stopped_duration_s: f64,
    /// Peak deceleration magnitude over the window, m/s².
    pub peak_deceleration_mps2: f64,
}

/// Review-sourced annotations carried through the pipeline unchanged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Annotations {
    pub initiator_role: Option<InitiatorRole>,
    pub f2r_role: Option<F2rRole>,
    pub pre_crash_kinematics: Option<PreCrashKinematics>,
}

/// One crashed vehicle's canonical view of a crash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashRecord {
    pub crash_id: String,
    /// The counted crashed vehicle.
    pub subject: Actor,
    pub partner: Option<Actor>,
    pub location: Location,
    /// (latitude, longitude) in degrees, when known.
    pub coordinates: Option<(f64, f64)>,
    pub road_class: RoadClass,
    /// Which event in the collision sequence first involved the subject
    /// (1 = first event).
    pub sequence_position: u32,
    pub configuration: Configuration,
    pub severity: Severity,
    pub annotations: Annotations,
    /// 1.0 for known passenger vehicles; fractional in [0, 1] after
    /// unknown-vehicle-type imputation.
    pub weight: f64,
}

impl CrashRecord {
    /// Checks the cross-field invariants the parsers must establish.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: &str| {
            Err(ModelError::InvalidRecord {
                crash_id: self.crash_id.clone(),
                reason: reason.to_string(),
            })
        };
        if !(0.0..=1.0).contains(&self.weight) {
            return fail("weight outside [0, 1]");
        }
        if self.sequence_position < 1 {
            return fail("sequence_position must be >= 1");
        }
        if self.severity.police_confirmed_serious == Some(true)
            && !self.severity.max_injury.is_serious_eligible()
        {
            return fail("police_confirmed_serious requires max_injury A or K");
        }
        if let Some((lat, lon)) = self.coordinates {
            if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                return fail("coordinates out of range");
            }
        }
        let mut orders: Vec<u32> = std::iter::once(self.subject.role_order)
            .chain(self.partner.iter().map(|p| p.role_order))
            .collect();
        orders.sort_unstable();
        if orders.iter().enumerate().any(|(i, &o)| o != i as u32 + 1) {
            return fail("role_order values must be unique and contiguous from 1");
        }
        Ok(())
    }
}

/// Whether a mileage figure covers all vehicle types or passenger vehicles
/// only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VehicleClass {
    All,
    PassengerOnly,
}

impl VehicleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::All => "all",
            VehicleClass::PassengerOnly => "passenger_only",
        }
    }
}

impl FromStr for VehicleClass {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "all" => VehicleClass::All,
            "passenger_only" => VehicleClass::PassengerOnly,
            _ => {
                return Err(ModelError::UnknownToken {
                    what: "vehicle class",
                    token: s.to_string(),
                })
            }
        })
    }
}

/// One row of miles traveled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureRow {
    pub location: Location,
    pub road_class: RoadClass,
    pub vehicle_class: VehicleClass,
    pub cell: Option<CellId>,
    pub miles: f64,
}

/// Miles traveled by (location, road class, vehicle class, optional cell).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExposureTable {
    pub rows: Vec<ExposureRow>,
}

impl ExposureTable {
    /// Total miles for a location over surface streets only.
    pub fn surface_miles(&self, location: &Location) -> f64 {
        self.rows
            .iter()
            .filter(|r| &r.location == location && r.road_class == RoadClass::SurfaceStreet)
            .map(|r| r.miles)
            .sum()
    }

    /// Total miles for a location across all road classes.
    pub fn total_miles(&self, location: &Location) -> f64 {
        self.rows
            .iter()
            .filter(|r| &r.location == location)
            .map(|r| r.miles)
            .sum()
    }
}

/// Names one cell of a fixed-level discretization of geographic space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId(pub String);

impl CellId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A deterministic mapping from coordinates to cells at a configured level.
///
/// The reweighting math is scheme-agnostic, so the scheme is pluggable; the
/// default is the equal-angle grid below.
pub trait CellScheme {
    /// Maps a coordinate to the cell containing it.
    ///
    /// Latitude must lie in [-90, 90] and longitude in [-180, 180].
    fn cell_of(&self, lat: f64, lon: f64, level: u32) -> Result<CellId, ModelError>;
}

/// Equal-angle latitude/longitude grid.
///
/// At level `L` the cell width is `180 / 2^L` degrees, giving `2^L` latitude
/// bands and `2^(L+1)` longitude bands. Cell ids are `g{L}:{i}:{j}` with `i`
/// the latitude band from the south pole and `j` the longitude band from the
/// antimeridian; points on the closing boundary (lat 90, lon 180) fall in
/// the last band.
#[derive(Debug, Clone, Copy, Default)]
pub struct EqualAngleGrid;

impl EqualAngleGrid {
    pub fn cell_width_degrees(level: u32) -> f64 {
        180.0 / (1u64 << level) as f64
    }

    /// Closed-form (i, j) band indices for a coordinate.
    pub fn indices(lat: f64, lon: f64, level: u32) -> (u64, u64) {
        let width = Self::cell_width_degrees(level);
        let bands_lat = 1u64 << level;
        let bands_lon = bands_lat * 2;
        let i = (((lat + 90.0) / width).floor() as i64).clamp(0, bands_lat as i64 - 1) as u64;
        let j = (((lon + 180.0) / width).floor() as i64).clamp(0, bands_lon as i64 - 1) as u64;
        (i, j)
    }
}

impl CellScheme for EqualAngleGrid {
    fn cell_of(&self, lat: f64, lon: f64, level: u32) -> Result<CellId, ModelError> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(ModelError::CoordinateOutOfRange { lat, lon });
        }
        let (i, j) = Self::indices(lat, lon, level);
        Ok(CellId(format!("g{level}:{i}:{j}")))
    }
}

/// Maps a coordinate to a cell under the default equal-angle grid.
pub fn cell_of(lat: f64, lon: f64, level: u32) -> Result<CellId, ModelError> {
    EqualAngleGrid.cell_of(lat, lon, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(crash_id: &str) -> CrashRecord {
        CrashRecord {
            crash_id: crash_id.to_string(),
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
            location: Location::Phoenix,
            coordinates: Some((33.45, -112.07)),
            road_class: RoadClass::SurfaceStreet,
            sequence_position: 1,
            configuration: Configuration::FrontToRear,
            severity: Severity {
                max_injury: InjurySeverity::C,
                any_airbag_any_vehicle: false,
                police_reported: true,
                police_confirmed_serious: None,
            },
            annotations: Annotations::default(),
            weight: 1.0,
        }
    }

    #[test]
    fn valid_record_passes_validation() {
        record("a").validate().unwrap();
    }

    #[test]
    fn confirmed_serious_requires_a_or_k() {
        let mut r = record("a");
        r.severity.police_confirmed_serious = Some(true);
        assert!(r.validate().is_err());
        r.severity.max_injury = InjurySeverity::A;
        r.validate().unwrap();
    }

    #[test]
    fn duplicate_role_order_rejected() {
        let mut r = record("a");
        r.partner.as_mut().unwrap().role_order = 1;
        assert!(r.validate().is_err());
    }

    #[test]
    fn cell_of_is_deterministic_at_origin() {
        for level in [0, 3, 13] {
            let a = cell_of(0.0, 0.0, level).unwrap();
            let b = cell_of(0.0, 0.0, level).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn nearby_points_share_a_cell_away_from_boundaries() {
        // Cell centers are far from boundaries; 1e-9 degrees cannot cross.
        let level = 13;
        let w = EqualAngleGrid::cell_width_degrees(level);
        let lat = 33.0 + w / 2.0;
        let lon = -112.0 + w / 2.0;
        let a = cell_of(lat, lon, level).unwrap();
        let b = cell_of(lat + 1e-9, lon - 1e-9, level).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_spanning_one_cell_width_matches_analytic_cell_count() {
        // 10x10 probe points across exactly one cell width, starting at a
        // cell corner. The oracle counts distinct cells by closed-form index
        // arithmetic over the probe offsets, independent of cell_of.
        let level = 6;
        let w = EqualAngleGrid::cell_width_degrees(level);
        let (lat0, lon0) = (12.0 * w - 90.0, 40.0 * w - 180.0);
        let offsets: Vec<f64> = (0..10).map(|k| w * k as f64 / 9.0).collect();

        let mut expected = std::collections::BTreeSet::new();
        for dy in &offsets {
            for dx in &offsets {
                let i = ((lat0 + dy + 90.0) / w).floor() as i64;
                let j = ((lon0 + dx + 180.0) / w).floor() as i64;
                expected.insert((i, j));
            }
        }

        let mut observed = std::collections::BTreeSet::new();
        for dy in &offsets {
            for dx in &offsets {
                observed.insert(cell_of(lat0 + dy, lon0 + dx, level).unwrap());
            }
        }
        assert_eq!(observed.len(), expected.len());
        // The last probe row/column land exactly one cell over.
        assert_eq!(observed.len(), 4);
    }

    #[test]
    fn out_of_range_coordinates_rejected() {
        assert!(cell_of(90.1, 0.0, 13).is_err());
        assert!(cell_of(0.0, -180.5, 13).is_err());
        // Closing boundary is accepted and clamped into the last band.
        assert!(cell_of(90.0, 180.0, 13).is_ok());
    }

    #[test]
    fn token_round_trips() {
        for g in CrashGroup::ALL {
            assert_eq!(g.as_str().parse::<CrashGroup>().unwrap(), g);
        }
        for o in OutcomeLevel::ALL {
            assert_eq!(o.as_str().parse::<OutcomeLevel>().unwrap(), o);
        }
        let t = CrashType::f2r(F2rRole::Struck);
        assert_eq!(t.to_string().parse::<CrashType>().unwrap(), t);
    }
}
