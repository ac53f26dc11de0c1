//! Mileage-table parsing and the canonical exposure format.

use std::path::Path;
use std::str::FromStr;

use crate::model::{CellId, ExposureRow, ExposureTable, Location, RoadClass, VehicleClass};

use super::config::{ConfigKind, MappingConfig};
use super::mapped::header_index;
use super::IngestError;

/// Parses a state mileage table through a mapping config.
///
/// Road-class labels are normalized through the config's value map;
/// freeway and interstate classes come out flagged for downstream
/// exclusion. The state totals cover all vehicle types, so `vehicle_class`
/// is recorded as `all` and the passenger-share adjustment happens in the
/// benchmark stage. Negative miles or an unknown location label fail the
/// offending row loudly.
pub fn parse_exposure(path: &Path, config: &MappingConfig) -> Result<ExposureTable, IngestError> {
    if config.kind != ConfigKind::Exposure {
        return Err(IngestError::Config {
            source_name: config.source_name.clone(),
            message: "parse_exposure requires a config with kind = \"exposure\"".to_string(),
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

    let row_err = |line: u64, message: String| IngestError::Row {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };

    let mut rows = Vec::new();
    for (index, result) in reader.records().enumerate() {
        let line = index as u64 + 2;
        let record = result.map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let get = |field: &str| -> Result<Option<String>, IngestError> {
            let Some(fm) = config.field(field) else {
                return Ok(None);
            };
            let raw = header
                .get(&fm.source)
                .and_then(|&i| record.get(i))
                .map(str::trim)
                .unwrap_or_default();
            match fm.translate(raw) {
                Some(value) => Ok(Some(value.to_string())),
                None => Err(row_err(
                    line,
                    format!("value '{raw}' in column '{}' is unmapped", fm.source),
                )),
            }
        };

        let location_token = get("location")?
            .ok_or_else(|| row_err(line, "location is required".to_string()))?;
        let location = Location::from_str(&location_token)
            .map_err(|e| row_err(line, format!("unknown location label: {e}")))?;
        let road_class = match get("road_class")? {
            Some(token) => RoadClass::from_str(&token)
                .map_err(|e| row_err(line, format!("bad road class: {e}")))?,
            None => RoadClass::Unknown,
        };
        let miles_raw = get("miles")?
            .ok_or_else(|| row_err(line, "miles is required".to_string()))?;
        let miles: f64 = miles_raw
            .replace(',', "")
            .parse()
            .map_err(|_| row_err(line, format!("unparseable miles '{miles_raw}'")))?;
        if !miles.is_finite() || miles < 0.0 {
            return Err(row_err(line, format!("negative miles {miles}")));
        }
        let cell = match get("cell_id")? {
            Some(id) if !id.is_empty() => Some(CellId(id)),
            _ => None,
        };

        rows.push(ExposureRow {
            location,
            road_class,
            vehicle_class: VehicleClass::All,
            cell,
            miles,
        });
    }
    Ok(ExposureTable { rows })
}

pub const EXPOSURE_COLUMNS: [&str; 5] =
    ["location", "road_class", "vehicle_class", "cell_id", "miles"];

/// Writes an exposure table in the canonical format.
pub fn write_exposure(path: &Path, table: &ExposureTable) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_path(path).map_err(|source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source: csv::Error| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(EXPOSURE_COLUMNS).map_err(csv_err)?;
    for row in &table.rows {
        writer
            .write_record([
                row.location.as_str(),
                row.road_class.as_str(),
                row.vehicle_class.as_str(),
                row.cell.as_ref().map(CellId::as_str).unwrap_or(""),
                &row.miles.to_string(),
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a canonical exposure table back.
pub fn read_exposure(path: &Path) -> Result<ExposureTable, IngestError> {
    let mut reader = super::open_reader(path, b',')?;
    let row_err = |line: usize, message: String| IngestError::Row {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut rows = Vec::new();
    for (index, result) in reader.records().enumerate() {
        let line = index + 2;
        let record = result.map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let miles: f64 = field(4)
            .parse()
            .map_err(|_| row_err(line, format!("unparseable miles '{}'", field(4))))?;
        rows.push(ExposureRow {
            location: field(0)
                .parse()
                .map_err(|e| row_err(line, format!("{e}")))?,
            road_class: field(1)
                .parse()
                .map_err(|e| row_err(line, format!("{e}")))?,
            vehicle_class: field(2)
                .parse()
                .map_err(|e| row_err(line, format!("{e}")))?,
            cell: match field(3) {
                "" => None,
                id => Some(CellId(id.to_string())),
            },
            miles,
        });
    }
    Ok(ExposureTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const CONFIG: &str = r#"
kind = "exposure"
source_name = "az_miles"

[[field_map]]
source = "County"
field = "location"
values = [{ pattern = "Maricopa", value = "Phoenix" }]

[[field_map]]
source = "FunctionalClass"
field = "road_class"
values = [
  { pattern = "Interstates", value = "freeway_or_interstate" },
  { pattern = "Other Arterials - Other Freeways and Expressways", value = "freeway_or_interstate" },
  { pattern = "*", value = "surface_street" },
]

[[field_map]]
source = "AnnualVMT"
field = "miles"
"#;

    fn parse_rows(rows: &[&str]) -> Result<ExposureTable, IngestError> {
        let config: MappingConfig = toml::from_str(CONFIG).unwrap();
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "County,FunctionalClass,AnnualVMT").unwrap();
        for row in rows {
            writeln!(file, "{row}").unwrap();
        }
        file.flush().unwrap();
        parse_exposure(file.path(), &config)
    }

    #[test]
    fn freeway_labels_are_flagged_for_exclusion() {
        let table = parse_rows(&[
            "Maricopa,Other Arterials - Other Freeways and Expressways,5000000",
            "Maricopa,Minor Arterials,2000000",
        ])
        .unwrap();
        assert_eq!(table.rows[0].road_class, RoadClass::FreewayOrInterstate);
        assert_eq!(table.surface_miles(&Location::Phoenix), 2.0e6);
        assert_eq!(table.total_miles(&Location::Phoenix), 7.0e6);
    }

    #[test]
    fn zero_miles_rows_are_retained() {
        let table = parse_rows(&["Maricopa,Local,0"]).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.surface_miles(&Location::Phoenix), 0.0);
    }

    #[test]
    fn location_rows_are_additive() {
        let table = parse_rows(&[
            "Maricopa,Local,4000000",
            "Maricopa,Minor Arterials,3500000",
            "Maricopa,Collectors,2500000",
        ])
        .unwrap();
        assert_eq!(table.surface_miles(&Location::Phoenix), 1.0e7);
    }

    #[test]
    fn negative_miles_fail_the_row() {
        assert!(matches!(
            parse_rows(&["Maricopa,Local,-5"]),
            Err(IngestError::Row { .. })
        ));
    }

    #[test]
    fn canonical_round_trip() {
        let table = parse_rows(&["Maricopa,Local,1234567.25"]).unwrap();
        let file = tempfile::NamedTempFile::new().unwrap();
        write_exposure(file.path(), &table).unwrap();
        let back = read_exposure(file.path()).unwrap();
        assert_eq!(table, back);
    }
}
