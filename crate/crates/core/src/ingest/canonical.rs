//! The canonical CSV formats used between pipeline stages.
//!
//! Column order is fixed and documented in `docs/data_dictionary.md`.
//! Reals are written in shortest round-trip form, so write-then-read
//! reproduces every value bit-exactly.

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use crate::classify::{ClassifiedRecord, PreCrashMovement};
use crate::model::{
    Actor, Annotations, CrashRecord, CrashType, OutcomeLevel, PreCrashKinematics, Severity,
};

use super::IngestError;

pub const RECORD_COLUMNS: [&str; 22] = [
    "crash_id",
    "location",
    "latitude",
    "longitude",
    "road_class",
    "subject_body_class",
    "subject_role_order",
    "subject_in_transport",
    "partner_body_class",
    "partner_role_order",
    "partner_in_transport",
    "sequence_position",
    "configuration",
    "max_injury",
    "any_airbag_any_vehicle",
    "police_reported",
    "police_confirmed_serious",
    "initiator_role",
    "f2r_role",
    "stopped_duration_s",
    "peak_decel_mps2",
    "weight",
];

pub const CLASSIFIED_COLUMNS: [&str; 29] = [
    "crash_id",
    "location",
    "latitude",
    "longitude",
    "road_class",
    "subject_body_class",
    "subject_role_order",
    "subject_in_transport",
    "partner_body_class",
    "partner_role_order",
    "partner_in_transport",
    "sequence_position",
    "configuration",
    "max_injury",
    "any_airbag_any_vehicle",
    "police_reported",
    "police_confirmed_serious",
    "initiator_role",
    "f2r_role",
    "stopped_duration_s",
    "peak_decel_mps2",
    "weight",
    "crash_type",
    "pre_crash_movement",
    "out_any_property_damage_or_injury",
    "out_police_reported",
    "out_any_injury_reported",
    "out_airbag_deployment",
    "out_suspected_serious_injury_plus",
];

fn opt_f64(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn record_fields(record: &CrashRecord) -> Vec<String> {
    let (lat, lon) = match record.coordinates {
        Some((lat, lon)) => (Some(lat), Some(lon)),
        None => (None, None),
    };
    vec![
        record.crash_id.clone(),
        record.location.as_str().to_string(),
        opt_f64(lat),
        opt_f64(lon),
        record.road_class.as_str().to_string(),
        record.subject.body_class.as_str().to_string(),
        record.subject.role_order.to_string(),
        record.subject.in_transport.to_string(),
        record
            .partner
            .as_ref()
            .map(|p| p.body_class.as_str().to_string())
            .unwrap_or_default(),
        record
            .partner
            .as_ref()
            .map(|p| p.role_order.to_string())
            .unwrap_or_default(),
        record
            .partner
            .as_ref()
            .map(|p| p.in_transport.to_string())
            .unwrap_or_default(),
        record.sequence_position.to_string(),
        record.configuration.as_str().to_string(),
        record.severity.max_injury.as_str().to_string(),
        record.severity.any_airbag_any_vehicle.to_string(),
        record.severity.police_reported.to_string(),
        record
            .severity
            .police_confirmed_serious
            .map(|b| b.to_string())
            .unwrap_or_default(),
        record
            .annotations
            .initiator_role
            .map(|r| r.as_str().to_string())
            .unwrap_or_default(),
        record
            .annotations
            .f2r_role
            .map(|r| r.as_str().to_string())
            .unwrap_or_default(),
        opt_f64(
            record
                .annotations
                .pre_crash_kinematics
                .map(|k| k.stopped_duration_s),
        ),
        opt_f64(
            record
                .annotations
                .pre_crash_kinematics
                .map(|k| k.peak_deceleration_mps2),
        ),
        record.weight.to_string(),
    ]
}

/// Writes canonical records with the fixed column order.
pub fn write_records(path: &Path, records: &[CrashRecord]) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_path(path).map_err(|source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source: csv::Error| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(RECORD_COLUMNS).map_err(csv_err)?;
    for record in records {
        writer.write_record(record_fields(record)).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct FieldReader<'a> {
    record: &'a csv::StringRecord,
    path: &'a Path,
    line: usize,
}

impl<'a> FieldReader<'a> {
    fn raw(&self, index: usize) -> &str {
        self.record.get(index).unwrap_or("")
    }

    fn err(&self, message: String) -> IngestError {
        IngestError::Row {
            path: self.path.to_path_buf(),
            message: format!("line {}: {message}", self.line),
        }
    }

    fn parse<T: FromStr>(&self, index: usize, what: &str) -> Result<T, IngestError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(index)
            .parse::<T>()
            .map_err(|e| self.err(format!("{what}: {e}")))
    }

    fn parse_opt<T: FromStr>(&self, index: usize, what: &str) -> Result<Option<T>, IngestError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(index) {
            "" => Ok(None),
            _ => self.parse(index, what).map(Some),
        }
    }
}

fn read_record_prefix(fields: &FieldReader<'_>) -> Result<CrashRecord, IngestError> {
    let lat: Option<f64> = fields.parse_opt(2, "latitude")?;
    let lon: Option<f64> = fields.parse_opt(3, "longitude")?;
    let coordinates = match (lat, lon) {
        (Some(lat), Some(lon)) => Some((lat, lon)),
        (None, None) => None,
        _ => return Err(fields.err("latitude and longitude must appear together".to_string())),
    };
    let partner = match fields.raw(8) {
        "" => None,
        _ => Some(Actor {
            body_class: fields.parse(8, "partner body class")?,
            role_order: fields.parse(9, "partner role order")?,
            in_transport: fields.parse(10, "partner in transport")?,
        }),
    };
    let kinematics = match (
        fields.parse_opt::<f64>(19, "stopped duration")?,
        fields.parse_opt::<f64>(20, "peak deceleration")?,
    ) {
        (Some(stopped), Some(decel)) => Some(PreCrashKinematics {
            stopped_duration_s: stopped,
            peak_deceleration_mps2: decel,
        }),
        _ => None,
    };
    let record = CrashRecord {
        crash_id: fields.raw(0).to_string(),
        subject: Actor {
            body_class: fields.parse(5, "subject body class")?,
            role_order: fields.parse(6, "subject role order")?,
            in_transport: fields.parse(7, "subject in transport")?,
        },
        partner,
        location: fields.parse(1, "location")?,
        coordinates,
        road_class: fields.parse(4, "road class")?,
        sequence_position: fields.parse(11, "sequence position")?,
        configuration: fields.parse(12, "configuration")?,
        severity: Severity {
            max_injury: fields.parse(13, "max injury")?,
            any_airbag_any_vehicle: fields.parse(14, "airbag flag")?,
            police_reported: fields.parse(15, "police reported")?,
            police_confirmed_serious: fields.parse_opt(16, "police confirmed serious")?,
        },
        annotations: Annotations {
            initiator_role: fields.parse_opt(17, "initiator role")?,
            f2r_role: fields.parse_opt(18, "f2r role")?,
            pre_crash_kinematics: kinematics,
        },
        weight: fields.parse(21, "weight")?,
    };
    record
        .validate()
        .map_err(|e| fields.err(format!("invalid record: {e}")))?;
    Ok(record)
}

/// Reads canonical records back; the inverse of [`write_records`].
pub fn read_records(path: &Path) -> Result<Vec<CrashRecord>, IngestError> {
    let mut reader = super::open_reader(path, b',')?;
    let mut records = Vec::new();
    for (index, result) in reader.records().enumerate() {
        let record = result.map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let fields = FieldReader {
            record: &record,
            path,
            line: index + 2,
        };
        records.push(read_record_prefix(&fields)?);
    }
    Ok(records)
}

/// Writes classified records: the canonical columns plus classification.
pub fn write_classified(path: &Path, records: &[ClassifiedRecord]) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_path(path).map_err(|source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source: csv::Error| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(CLASSIFIED_COLUMNS).map_err(csv_err)?;
    for classified in records {
        let mut fields = record_fields(&classified.record);
        fields.push(classified.crash_type.to_string());
        fields.push(
            classified
                .pre_crash_movement
                .map(|m| m.as_str().to_string())
                .unwrap_or_default(),
        );
        for outcome in OutcomeLevel::ALL {
            fields.push(classified.outcomes.contains(&outcome).to_string());
        }
        writer.write_record(fields).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads classified records back; the inverse of [`write_classified`].
pub fn read_classified(path: &Path) -> Result<Vec<ClassifiedRecord>, IngestError> {
    let mut reader = super::open_reader(path, b',')?;
    let mut records = Vec::new();
    for (index, result) in reader.records().enumerate() {
        let record = result.map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let fields = FieldReader {
            record: &record,
            path,
            line: index + 2,
        };
        let base = read_record_prefix(&fields)?;
        let crash_type: CrashType = fields.parse(22, "crash type")?;
        let pre_crash_movement: Option<PreCrashMovement> =
            fields.parse_opt(23, "pre-crash movement")?;
        let mut outcomes = BTreeSet::new();
        for (offset, outcome) in OutcomeLevel::ALL.into_iter().enumerate() {
            if fields.parse::<bool>(24 + offset, "outcome flag")? {
                outcomes.insert(outcome);
            }
        }
        records.push(ClassifiedRecord {
            record: base,
            crash_type,
            outcomes,
            pre_crash_movement,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_record;
    use crate::model::{
        BodyClass, Configuration, InjurySeverity, Location, RoadClass,
    };

    fn sample() -> CrashRecord {
        CrashRecord {
            crash_id: "quoted,\"id\"".to_string(),
            subject: Actor {
                body_class: BodyClass::PassengerVehicle,
                role_order: 1,
                in_transport: true,
            },
            partner: Some(Actor {
                body_class: BodyClass::Cyclist,
                role_order: 2,
                in_transport: true,
            }),
            location: Location::SanFrancisco,
            coordinates: Some((37.7610139, -122.4401)),
            road_class: RoadClass::SurfaceStreet,
            sequence_position: 1,
            configuration: Configuration::OtherOrUnknown,
            severity: Severity {
                max_injury: InjurySeverity::C,
                any_airbag_any_vehicle: false,
                police_reported: true,
                police_confirmed_serious: None,
            },
            annotations: Annotations {
                initiator_role: None,
                f2r_role: None,
                pre_crash_kinematics: Some(PreCrashKinematics {
                    stopped_duration_s: 0.30000000000000004,
                    peak_deceleration_mps2: 2.25,
                }),
            },
            weight: 0.89,
        }
    }

    #[test]
    fn record_round_trip_is_exact() {
        let records = vec![sample()];
        let file = tempfile::NamedTempFile::new().unwrap();
        write_records(file.path(), &records).unwrap();
        let back = read_records(file.path()).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn classified_round_trip_is_exact() {
        let classified = vec![classify_record(sample()).unwrap()];
        let file = tempfile::NamedTempFile::new().unwrap();
        write_classified(file.path(), &classified).unwrap();
        let back = read_classified(file.path()).unwrap();
        assert_eq!(classified, back);
    }
}
