//! Config-driven parsing of state crash extracts.

use std::collections::HashMap;
use std::path::Path;

use crate::model::{
    Actor, Annotations, BodyClass, Configuration, CrashRecord, F2rRole, InitiatorRole,
    InjurySeverity, Location, PreCrashKinematics, RoadClass, Severity,
};

use super::config::{ConfigKind, MappingConfig};
use super::{parse_bool, IngestError, IngestReport};

struct Row<'a> {
    header: &'a HashMap<String, usize>,
    record: &'a csv::StringRecord,
}

impl<'a> Row<'a> {
    fn get(&self, column: &str) -> Option<String> {
        self.header
            .get(column)
            .and_then(|&i| self.record.get(i))
            .map(|s| s.trim().to_string())
    }
}

/// Parses one delimiter-separated crash extract through a mapping config.
///
/// Rows failing the in-transport, passenger-vehicle, or surface-street
/// predicates are dropped and tallied under those rule names, in that
/// order. Rows that cannot be translated into a valid canonical record are
/// tallied under `unparseable` (with any offending value recorded in
/// `unmapped_values`) and never abort the parse.
pub fn parse_crash_file(
    path: &Path,
    config: &MappingConfig,
) -> Result<(Vec<CrashRecord>, IngestReport), IngestError> {
    if config.kind != ConfigKind::Crash {
        return Err(IngestError::Config {
            source_name: config.source_name.clone(),
            message: "parse_crash_file requires a config with kind = \"crash\"".to_string(),
        });
    }
    config.validate()?;

    let mut reader = super::open_reader(path, config.delimiter_byte()?)?;
    let header = header_index(&mut reader, path)?;
    for column in config.referenced_columns() {
        if !header.contains_key(column) {
            return Err(IngestError::MissingColumn {
                source_name: config.source_name.clone(),
                column: column.to_string(),
                path: path.to_path_buf(),
            });
        }
    }

    let mut report = IngestReport::new(&config.source_name);
    let mut records = Vec::new();

    for result in reader.records() {
        let record = match result {
            Ok(r) => r,
            Err(_) => {
                report.rows_read += 1;
                report.drop("unparseable");
                continue;
            }
        };
        report.rows_read += 1;
        let row = Row {
            header: &header,
            record: &record,
        };
        let get = |c: &str| row.get(c);

        let mut dropped = false;
        for (rules, name) in [
            (&config.in_transport_rules, "in_transport"),
            (&config.passenger_vehicle_rules, "passenger_vehicle"),
            (&config.surface_street_rules, "surface_street"),
        ] {
            if let Some(predicate) = rules {
                if !predicate.evaluate(&get) {
                    report.drop(name);
                    dropped = true;
                    break;
                }
            }
        }
        if dropped {
            continue;
        }

        match build_record(&row, config, &mut report) {
            Ok(record) => {
                report.rows_emitted += 1;
                records.push(record);
            }
            Err(()) => report.drop("unparseable"),
        }
    }

    records.sort_by(|a, b| a.crash_id.cmp(&b.crash_id));
    debug_assert!(report.is_conserved());
    Ok((records, report))
}

pub(super) fn header_index(
    reader: &mut csv::Reader<std::fs::File>,
    path: &Path,
) -> Result<HashMap<String, usize>, IngestError> {
    let headers = reader.headers().map_err(|source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(headers
        .iter()
        .enumerate()
        .map(|(i, name)| (name.trim().to_string(), i))
        .collect())
}

/// Translates one kept row. `Err(())` marks the row unparseable; the reason
/// has already been tallied on the report.
fn build_record(
    row: &Row<'_>,
    config: &MappingConfig,
    report: &mut IngestReport,
) -> Result<CrashRecord, ()> {
    // Resolves a mapped field to its canonical token, tallying misses.
    let mut lookup = |field: &str| -> Result<Option<String>, ()> {
        let Some(fm) = config.field(field) else {
            return Ok(None);
        };
        let raw = row.get(&fm.source).unwrap_or_default();
        if raw.is_empty() && fm.values.is_empty() {
            return Ok(None);
        }
        match fm.translate(&raw) {
            Some(value) => Ok(Some(value.to_string())),
            None => {
                report.unmapped(&fm.source, &raw);
                Err(())
            }
        }
    };

    let crash_id = lookup("crash_id")?.filter(|s| !s.is_empty()).ok_or(())?;
    let location: Location = lookup("location")?.ok_or(())?.parse().map_err(|_| ())?;
    let road_class: RoadClass = match lookup("road_class")? {
        Some(token) => token.parse().map_err(|_| ())?,
        None => RoadClass::Unknown,
    };
    let configuration: Configuration = match lookup("configuration")? {
        Some(token) => token.parse().map_err(|_| ())?,
        None => Configuration::OtherOrUnknown,
    };
    let subject_body: BodyClass = match lookup("subject_body_class")? {
        Some(token) => token.parse().map_err(|_| ())?,
        None => BodyClass::PassengerVehicle,
    };
    let partner = match lookup("partner_body_class")? {
        Some(token) if !token.is_empty() && token != "none" => {
            let body: BodyClass = token.parse().map_err(|_| ())?;
            let in_transport = match lookup("partner_in_transport")? {
                Some(raw) => parse_bool(&raw).ok_or(())?,
                None => true,
            };
            Some(Actor {
                body_class: body,
                role_order: 2,
                in_transport,
            })
        }
        _ => None,
    };

    let sequence_position = match lookup("sequence_position")? {
        Some(raw) if !raw.is_empty() => raw.parse::<u32>().map_err(|_| ())?,
        _ => 1,
    };
    let max_injury: InjurySeverity = match lookup("max_injury")? {
        Some(token) => token.parse().map_err(|_| ())?,
        None => InjurySeverity::None,
    };
    let any_airbag = match lookup("any_airbag_any_vehicle")? {
        Some(raw) => parse_bool(&raw).ok_or(())?,
        None => false,
    };
    let police_reported = match lookup("police_reported")? {
        Some(raw) => parse_bool(&raw).ok_or(())?,
        None => true,
    };
    let police_confirmed_serious = match lookup("police_confirmed_serious")? {
        Some(raw) if !raw.is_empty() => Some(parse_bool(&raw).ok_or(())?),
        _ => None,
    };

    let coordinates = match (lookup("latitude")?, lookup("longitude")?) {
        (Some(lat), Some(lon)) if !lat.is_empty() && !lon.is_empty() => Some((
            lat.parse::<f64>().map_err(|_| ())?,
            lon.parse::<f64>().map_err(|_| ())?,
        )),
        _ => None,
    };

    let initiator_role: Option<InitiatorRole> = match lookup("initiator_role")? {
        Some(raw) if !raw.is_empty() => Some(raw.parse().map_err(|_| ())?),
        _ => None,
    };
    let f2r_role: Option<F2rRole> = match lookup("f2r_role")? {
        Some(raw) if !raw.is_empty() => Some(raw.parse().map_err(|_| ())?),
        _ => None,
    };
    let kinematics = match (lookup("stopped_duration_s")?, lookup("peak_decel_mps2")?) {
        (Some(stopped), Some(decel)) if !stopped.is_empty() && !decel.is_empty() => {
            Some(PreCrashKinematics {
                stopped_duration_s: stopped.parse().map_err(|_| ())?,
                peak_deceleration_mps2: decel.parse().map_err(|_| ())?,
            })
        }
        _ => None,
    };

    let weight = if subject_body == BodyClass::UnknownVehicle {
        config.unknown_vehicle_weight
    } else {
        1.0
    };

    let record = CrashRecord {
        crash_id,
        subject: Actor {
            body_class: subject_body,
            role_order: 1,
            in_transport: true,
        },
        partner,
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
            initiator_role,
            f2r_role,
            pre_crash_kinematics: kinematics,
        },
        weight,
    };
    record.validate().map_err(|_| ())?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const CONFIG: &str = r#"
kind = "crash"
source_name = "test_state"
unknown_vehicle_weight = 0.89

[in_transport_rules]
not = { column = "action", one_of = ["PARKED*"] }

[passenger_vehicle_rules]
column = "veh"
one_of = ["CAR", "SUV", "UNSPECIFIED"]

[surface_street_rules]
not = { column = "road", one_of = ["INTERSTATE", "FREEWAY*"] }

[[field_map]]
source = "id"
field = "crash_id"

[[field_map]]
source = "county"
field = "location"
values = [
  { pattern = "MARICOPA", value = "Phoenix" },
  { pattern = "SAN FRANCISCO", value = "San Francisco" },
]

[[field_map]]
source = "veh"
field = "subject_body_class"
values = [
  { pattern = "CAR", value = "passenger_vehicle" },
  { pattern = "SUV", value = "passenger_vehicle" },
  { pattern = "UNSPECIFIED", value = "unknown_vehicle" },
]

[[field_map]]
source = "road"
field = "road_class"
values = [
  { pattern = "INTERSTATE", value = "freeway_or_interstate" },
  { pattern = "FREEWAY*", value = "freeway_or_interstate" },
  { pattern = "*", value = "surface_street" },
]

[[field_map]]
source = "sev"
field = "max_injury"
values = [
  { pattern = "FATAL", value = "K" },
  { pattern = "INJURY", value = "C" },
  { pattern = "PDO", value = "none" },
]
"#;

    fn write_fixture(rows: &[&str]) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "id,county,veh,road,action,sev").unwrap();
        for row in rows {
            writeln!(file, "{row}").unwrap();
        }
        file.flush().unwrap();
        file
    }

    fn config() -> MappingConfig {
        toml::from_str(CONFIG).unwrap()
    }

    #[test]
    fn passenger_row_gets_unit_weight() {
        let file = write_fixture(&["a1,MARICOPA,CAR,LOCAL,MOVING,INJURY"]);
        let (records, report) = parse_crash_file(file.path(), &config()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].weight, 1.0);
        assert_eq!(records[0].subject.body_class, BodyClass::PassengerVehicle);
        assert_eq!(records[0].location, Location::Phoenix);
        assert!(report.is_conserved());
    }

    #[test]
    fn unspecified_vehicle_gets_config_weight() {
        let file = write_fixture(&["a1,SAN FRANCISCO,UNSPECIFIED,LOCAL,MOVING,PDO"]);
        let (records, _) = parse_crash_file(file.path(), &config()).unwrap();
        assert_eq!(records[0].weight, 0.89);
        assert_eq!(records[0].subject.body_class, BodyClass::UnknownVehicle);
    }

    #[test]
    fn surface_street_drops_are_tallied() {
        let rows: Vec<String> = (0..10)
            .map(|i| {
                let road = if i < 3 { "FREEWAY 101" } else { "LOCAL" };
                format!("r{i},MARICOPA,CAR,{road},MOVING,PDO")
            })
            .collect();
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        let file = write_fixture(&refs);
        let (records, report) = parse_crash_file(file.path(), &config()).unwrap();
        assert_eq!(records.len(), 7);
        assert_eq!(report.rows_dropped_by_rule["surface_street"], 3);
        assert_eq!(report.rows_read, 10);
        assert!(report.is_conserved());
    }

    #[test]
    fn unmapped_value_is_tallied_not_fatal() {
        let file = write_fixture(&[
            "a1,MARICOPA,CAR,LOCAL,MOVING,INJURY",
            "a2,MARICOPA,CAR,LOCAL,MOVING,MYSTERY",
        ]);
        let (records, report) = parse_crash_file(file.path(), &config()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(report.rows_dropped_by_rule["unparseable"], 1);
        assert_eq!(report.unmapped_values.len(), 1);
        assert_eq!(report.unmapped_values[0].column, "sev");
        assert_eq!(report.unmapped_values[0].value, "MYSTERY");
    }

    #[test]
    fn missing_referenced_column_is_a_config_error() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "id,county,veh,road,sev").unwrap();
        writeln!(file, "a1,MARICOPA,CAR,LOCAL,PDO").unwrap();
        file.flush().unwrap();
        let err = parse_crash_file(file.path(), &config()).unwrap_err();
        match err {
            IngestError::MissingColumn { column, .. } => assert_eq!(column, "action"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn parked_rows_drop_under_in_transport() {
        let file = write_fixture(&[
            "a1,MARICOPA,CAR,LOCAL,PARKED OFF ROAD,PDO",
            "a2,MARICOPA,CAR,LOCAL,MOVING,PDO",
        ]);
        let (records, report) = parse_crash_file(file.path(), &config()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(report.rows_dropped_by_rule["in_transport"], 1);
    }
}
