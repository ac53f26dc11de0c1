//! The cell-mileage CSV: per-cell human miles, human crashes per outcome,
//! and ADS miles, for the spatial dynamic benchmark.

use std::collections::BTreeMap;
use std::path::Path;

use crate::benchmark::CellMileageRow;
use crate::model::{CellId, OutcomeLevel};

use super::IngestError;

pub const CELL_COLUMNS: [&str; 9] = [
    "location",
    "cell_id",
    "human_miles",
    "human_crashes_any_property_damage_or_injury",
    "human_crashes_police_reported",
    "human_crashes_any_injury_reported",
    "human_crashes_airbag_deployment",
    "human_crashes_suspected_serious_injury_plus",
    "ads_miles",
];

pub fn write_cell_mileage(path: &Path, rows: &[CellMileageRow]) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_path(path).map_err(|source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source: csv::Error| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(CELL_COLUMNS).map_err(csv_err)?;
    for row in rows {
        let mut fields = vec![
            row.location.as_str().to_string(),
            row.cell.as_str().to_string(),
            row.human_miles.to_string(),
        ];
        for outcome in OutcomeLevel::ALL {
            fields.push(row.crashes(outcome).to_string());
        }
        fields.push(row.ads_miles.to_string());
        writer.write_record(fields).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_cell_mileage(path: &Path) -> Result<Vec<CellMileageRow>, IngestError> {
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
        let field = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let number = |i: usize| -> Result<f64, IngestError> {
            let raw = field(i);
            let value: f64 = raw
                .parse()
                .map_err(|_| row_err(line, format!("unparseable number '{raw}'")))?;
            if !value.is_finite() || value < 0.0 {
                return Err(row_err(line, format!("negative value {value}")));
            }
            Ok(value)
        };
        let mut human_crashes = BTreeMap::new();
        for (offset, outcome) in OutcomeLevel::ALL.into_iter().enumerate() {
            human_crashes.insert(outcome, number(3 + offset)?);
        }
        rows.push(CellMileageRow {
            location: field(0)
                .parse()
                .map_err(|e| row_err(line, format!("{e}")))?,
            cell: CellId(field(1)),
            human_miles: number(2)?,
            human_crashes,
            ads_miles: number(8)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Location;

    #[test]
    fn cell_mileage_round_trip() {
        let rows = vec![CellMileageRow {
            location: Location::Phoenix,
            cell: CellId("g13:4521:1203".to_string()),
            human_miles: 3.0e7,
            human_crashes: OutcomeLevel::ALL
                .into_iter()
                .zip([120.0, 80.0, 46.0, 46.0, 4.0])
                .collect(),
            ads_miles: 2.0e7,
        }];
        let file = tempfile::NamedTempFile::new().unwrap();
        write_cell_mileage(file.path(), &rows).unwrap();
        let back = read_cell_mileage(file.path()).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn negative_miles_rejected() {
        let file = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(
            file.path(),
            format!("{}\nPhoenix,g1:0:0,-5,0,0,0,0,0,1\n", CELL_COLUMNS.join(",")),
        )
        .unwrap();
        assert!(matches!(
            read_cell_mileage(file.path()),
            Err(IngestError::Row { .. })
        ));
    }
}
