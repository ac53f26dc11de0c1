//! Parser for the fleet incident-report extract.
//!
//! The file is the operator's standing-general-order-shaped export plus the
//! supplemental review annotation columns (`Ann *`). Facts that come from
//! sensor, video, or police-report review (any-vehicle airbag, confirmed
//! severity, in-transport status, crash-type fields) are read from those
//! annotation columns rather than inferred.

use std::path::Path;

use crate::model::{
    Actor, Annotations, BodyClass, Configuration, CrashRecord, F2rRole, InitiatorRole,
    InjurySeverity, Location, PreCrashKinematics, RoadClass, Severity,
};

use super::mapped::header_index;
use super::{parse_bool, IngestError, IngestReport};

const COL_REPORT_ID: &str = "Report ID";
const COL_CITY: &str = "City";
const COL_SEVERITY: &str = "Highest Injury Severity Alleged";
const COL_SV_AIRBAG: &str = "SV Any Air Bags Deployed?";
const COL_CP_AIRBAG: &str = "CP Any Air Bags Deployed?";
const COL_ROADWAY: &str = "Roadway Type";
const COL_LAT: &str = "Latitude";
const COL_LON: &str = "Longitude";
const COL_ANN_AIRBAG_ANY: &str = "Ann Airbag Any Vehicle";
const COL_ANN_CONFIRMED: &str = "Ann Police Confirmed Max Severity";
const COL_ANN_IN_TRANSPORT: &str = "Ann In Transport";
const COL_ANN_IMPACT: &str = "Ann Impact";
const COL_ANN_NARRATIVE_INJURY: &str = "Ann Narrative Injury Mention";
const COL_ANN_POLICE_REPORTED: &str = "Ann Police Reported";
const COL_ANN_SEQUENCE: &str = "Ann Sequence Position";
const COL_ANN_PARTNER: &str = "Ann Partner Body Class";
const COL_ANN_CONFIGURATION: &str = "Ann Configuration";
const COL_ANN_F2R_ROLE: &str = "Ann F2R Role";
const COL_ANN_INITIATOR: &str = "Ann Initiator Role";
const COL_ANN_STOPPED: &str = "Ann Stopped Duration S";
const COL_ANN_DECEL: &str = "Ann Peak Decel MPS2";

/// Parses the fleet incident extract into canonical records.
///
/// Severity mapping: Minor/Moderate/Serious/Fatality allege an injury
/// (C/B/A/K); "Unknown" together with the narrative-injury annotation
/// becomes the unknown-with-injury-allegation state. The airbag flag is the
/// OR of both report fields and the any-vehicle review annotation. A
/// confirmed K or A from the police-report annotation sets the
/// suspected-serious flag; a confirmed lower severity clears it.
pub fn parse_sgo_file(path: &Path) -> Result<(Vec<CrashRecord>, IngestReport), IngestError> {
    let mut reader = super::open_reader(path, b',')?;
    let header = header_index(&mut reader, path)?;
    if !header.contains_key(COL_SEVERITY) {
        return Err(IngestError::MissingRequiredColumn {
            column: COL_SEVERITY.to_string(),
            path: path.to_path_buf(),
        });
    }
    for column in [COL_REPORT_ID, COL_CITY, COL_SV_AIRBAG, COL_CP_AIRBAG] {
        if !header.contains_key(column) {
            return Err(IngestError::MissingRequiredColumn {
                column: column.to_string(),
                path: path.to_path_buf(),
            });
        }
    }

    let mut report = IngestReport::new("sgo");
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
        let get = |column: &str| -> String {
            header
                .get(column)
                .and_then(|&i| record.get(i))
                .map(|s| s.trim().to_string())
                .unwrap_or_default()
        };

        // Subselection: impacted, in-transport, surface street.
        if !parse_bool(&get(COL_ANN_IMPACT)).unwrap_or(true) {
            report.drop("impact");
            continue;
        }
        if !parse_bool(&get(COL_ANN_IN_TRANSPORT)).unwrap_or(false) {
            report.drop("in_transport");
            continue;
        }
        let road_class = match get(COL_ROADWAY).to_ascii_lowercase().as_str() {
            "street" | "intersection" | "surface street" => RoadClass::SurfaceStreet,
            "highway / freeway" | "freeway" | "interstate" => RoadClass::FreewayOrInterstate,
            _ => RoadClass::Unknown,
        };
        if road_class != RoadClass::SurfaceStreet {
            report.drop("surface_street");
            continue;
        }

        match build_record(&get, road_class, &mut report) {
            Some(record) => {
                report.rows_emitted += 1;
                records.push(record);
            }
            None => report.drop("unparseable"),
        }
    }

    records.sort_by(|a, b| a.crash_id.cmp(&b.crash_id));
    debug_assert!(report.is_conserved());
    Ok((records, report))
}

fn build_record(
    get: &dyn Fn(&str) -> String,
    road_class: RoadClass,
    report: &mut IngestReport,
) -> Option<CrashRecord> {
    let crash_id = get(COL_REPORT_ID);
    if crash_id.is_empty() {
        return None;
    }
    let location = location_from_city(&get(COL_CITY));

    let narrative_injury = parse_bool(&get(COL_ANN_NARRATIVE_INJURY)).unwrap_or(false);
    let severity_raw = get(COL_SEVERITY);
    let mut max_injury = match severity_raw.to_ascii_lowercase().as_str() {
        "no injuries" | "none" | "no injury" => InjurySeverity::None,
        "minor" => InjurySeverity::C,
        "moderate" => InjurySeverity::B,
        "serious" => InjurySeverity::A,
        "fatality" => InjurySeverity::K,
        "unknown" => {
            if narrative_injury {
                InjurySeverity::UnknownWithInjuryAllegation
            } else {
                InjurySeverity::None
            }
        }
        _ => {
            report.unmapped(COL_SEVERITY, &severity_raw);
            return None;
        }
    };

    // Police-confirmed severity overrides the allegation in both
    // directions: confirmation of K/A upgrades, confirmation of a lower
    // level withholds the serious flag.
    let confirmed = get(COL_ANN_CONFIRMED);
    let police_confirmed_serious = match confirmed.to_ascii_uppercase().as_str() {
        "" => None,
        "K" => {
            max_injury = InjurySeverity::K;
            Some(true)
        }
        "A" => {
            if max_injury != InjurySeverity::K {
                max_injury = InjurySeverity::A;
            }
            Some(true)
        }
        "B" | "C" | "O" | "NONE" => Some(false),
        other => {
            report.unmapped(COL_ANN_CONFIRMED, other);
            return None;
        }
    };

    let airbag = [get(COL_SV_AIRBAG), get(COL_CP_AIRBAG)]
        .iter()
        .any(|v| v.eq_ignore_ascii_case("yes"))
        || parse_bool(&get(COL_ANN_AIRBAG_ANY)).unwrap_or(false);

    let coordinates = match (get(COL_LAT), get(COL_LON)) {
        (lat, lon) if !lat.is_empty() && !lon.is_empty() => {
            Some((lat.parse::<f64>().ok()?, lon.parse::<f64>().ok()?))
        }
        _ => None,
    };

    let sequence_position = match get(COL_ANN_SEQUENCE) {
        s if s.is_empty() => 1,
        s => s.parse::<u32>().ok()?,
    };
    let partner = match get(COL_ANN_PARTNER) {
        s if s.is_empty() || s == "none" => None,
        s => Some(Actor {
            body_class: s.parse::<BodyClass>().ok()?,
            role_order: 2,
            in_transport: true,
        }),
    };
    let configuration = match get(COL_ANN_CONFIGURATION) {
        s if s.is_empty() => Configuration::OtherOrUnknown,
        s => s.parse::<Configuration>().ok()?,
    };
    let f2r_role = match get(COL_ANN_F2R_ROLE) {
        s if s.is_empty() => None,
        s => Some(s.parse::<F2rRole>().ok()?),
    };
    let initiator_role = match get(COL_ANN_INITIATOR) {
        s if s.is_empty() => None,
        s => Some(s.parse::<InitiatorRole>().ok()?),
    };
    let kinematics = match (get(COL_ANN_STOPPED), get(COL_ANN_DECEL)) {
        (stopped, decel) if !stopped.is_empty() && !decel.is_empty() => {
            Some(PreCrashKinematics {
                stopped_duration_s: stopped.parse().ok()?,
                peak_deceleration_mps2: decel.parse().ok()?,
            })
        }
        _ => None,
    };

    let record = CrashRecord {
        crash_id,
        subject: Actor {
            body_class: BodyClass::PassengerVehicle,
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
            any_airbag_any_vehicle: airbag,
            police_reported: parse_bool(&get(COL_ANN_POLICE_REPORTED)).unwrap_or(false),
            police_confirmed_serious,
        },
        annotations: Annotations {
            initiator_role,
            f2r_role,
            pre_crash_kinematics: kinematics,
        },
        weight: 1.0,
    };
    record.validate().ok()?;
    Some(record)
}

fn location_from_city(city: &str) -> Location {
    match city.to_ascii_lowercase().as_str() {
        "phoenix" | "tempe" | "mesa" | "chandler" | "scottsdale" => Location::Phoenix,
        "san francisco" | "daly city" => Location::SanFrancisco,
        "los angeles" | "santa monica" | "west hollywood" => Location::LosAngeles,
        "austin" => Location::Austin,
        other => Location::Other(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const HEADER: &str = "Report ID,City,Highest Injury Severity Alleged,SV Any Air Bags Deployed?,CP Any Air Bags Deployed?,Roadway Type,Latitude,Longitude,Narrative,Ann Airbag Any Vehicle,Ann Police Confirmed Max Severity,Ann In Transport,Ann Impact,Ann Narrative Injury Mention,Ann Police Reported,Ann Sequence Position,Ann Partner Body Class,Ann Configuration,Ann F2R Role,Ann Initiator Role,Ann Stopped Duration S,Ann Peak Decel MPS2";

    fn parse_rows(rows: &[&str]) -> (Vec<CrashRecord>, IngestReport) {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "{HEADER}").unwrap();
        for row in rows {
            writeln!(file, "{row}").unwrap();
        }
        file.flush().unwrap();
        parse_sgo_file(file.path()).unwrap()
    }

    fn row(id: &str, severity: &str, overrides: &[(usize, &str)]) -> String {
        // Column order follows HEADER; start from a benign in-transport
        // surface-street crash and patch the indices under test.
        let mut fields = vec![
            id,
            "Phoenix",
            severity,
            "No",
            "No",
            "Street",
            "33.45",
            "-112.07",
            "narrative",
            "no",
            "",
            "yes",
            "yes",
            "no",
            "no",
            "1",
            "passenger_vehicle",
            "front_to_rear",
            "struck",
            "responder",
            "",
            "",
        ];
        for &(index, value) in overrides {
            fields[index] = value;
        }
        fields.join(",")
    }

    #[test]
    fn minor_severity_counts_as_injury_alleged() {
        let (records, _) = parse_rows(&[&row("r1", "Minor", &[])]);
        assert_eq!(records[0].severity.max_injury, InjurySeverity::C);
        assert!(records[0].severity.max_injury.is_injury());
    }

    #[test]
    fn serious_alleged_but_confirmed_c_is_not_serious() {
        let (records, _) = parse_rows(&[&row("r1", "Serious", &[(10, "C")])]);
        let severity = &records[0].severity;
        assert_eq!(severity.police_confirmed_serious, Some(false));
        assert!(severity.max_injury.is_injury());
    }

    #[test]
    fn confirmed_k_sets_serious() {
        let (records, _) = parse_rows(&[&row("r1", "Fatality", &[(10, "K")])]);
        assert_eq!(records[0].severity.police_confirmed_serious, Some(true));
        assert_eq!(records[0].severity.max_injury, InjurySeverity::K);
    }

    #[test]
    fn airbag_is_or_of_fields_and_review() {
        // Both report fields say no, the any-vehicle review says yes.
        let (records, _) = parse_rows(&[&row("r1", "No Injuries", &[(9, "yes")])]);
        assert!(records[0].severity.any_airbag_any_vehicle);
        let (records, _) = parse_rows(&[&row("r2", "No Injuries", &[(4, "Yes")])]);
        assert!(records[0].severity.any_airbag_any_vehicle);
    }

    #[test]
    fn unknown_severity_with_narrative_mention() {
        let (with, _) = parse_rows(&[&row("r1", "Unknown", &[(13, "yes")])]);
        assert_eq!(
            with[0].severity.max_injury,
            InjurySeverity::UnknownWithInjuryAllegation
        );
        let (without, _) = parse_rows(&[&row("r1", "Unknown", &[])]);
        assert_eq!(without[0].severity.max_injury, InjurySeverity::None);
    }

    #[test]
    fn unknown_severity_token_is_tallied() {
        let (records, report) = parse_rows(&[
            &row("r1", "Catastrophic", &[]),
            &row("r2", "Minor", &[]),
        ]);
        assert_eq!(records.len(), 1);
        assert_eq!(report.rows_dropped_by_rule["unparseable"], 1);
        assert_eq!(report.unmapped_values[0].value, "Catastrophic");
        assert!(report.is_conserved());
    }

    #[test]
    fn not_in_transport_and_non_surface_drop() {
        let (records, report) = parse_rows(&[
            &row("r1", "Minor", &[(11, "no")]),
            &row("r2", "Minor", &[(5, "Highway / Freeway")]),
            &row("r3", "Minor", &[(12, "no")]),
            &row("r4", "Minor", &[]),
        ]);
        assert_eq!(records.len(), 1);
        assert_eq!(report.rows_dropped_by_rule["in_transport"], 1);
        assert_eq!(report.rows_dropped_by_rule["surface_street"], 1);
        assert_eq!(report.rows_dropped_by_rule["impact"], 1);
    }

    #[test]
    fn missing_severity_column_is_fatal() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "Report ID,City").unwrap();
        writeln!(file, "r1,Phoenix").unwrap();
        file.flush().unwrap();
        assert!(matches!(
            parse_sgo_file(file.path()),
            Err(IngestError::MissingRequiredColumn { .. })
        ));
    }
}
