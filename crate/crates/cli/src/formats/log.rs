//! Measurement logs as CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wheelprobe_core::MeasurementRecord;

use crate::error::{CliError, Result};

pub const HEADER: [&str; 7] = [
    "timestamp_s",
    "normal_load_N",
    "drawbar_pull_N",
    "torque_Nm",
    "commanded_slip",
    "sinkage_m",
    "soil",
];

#[derive(Serialize, Deserialize)]
struct Row {
    timestamp_s: f64,
    #[serde(rename = "normal_load_N")]
    normal_load: f64,
    #[serde(rename = "drawbar_pull_N")]
    drawbar_pull: f64,
    #[serde(rename = "torque_Nm")]
    torque: f64,
    commanded_slip: f64,
    sinkage_m: f64,
    soil: String,
}

impl From<&MeasurementRecord> for Row {
    fn from(r: &MeasurementRecord) -> Self {
        Self {
            timestamp_s: r.timestamp,
            normal_load: r.normal_load,
            drawbar_pull: r.drawbar_pull,
            torque: r.driving_torque,
            commanded_slip: r.commanded_slip,
            sinkage_m: r.measured_sinkage,
            soil: r.soil_name.clone(),
        }
    }
}

impl From<Row> for MeasurementRecord {
    fn from(r: Row) -> Self {
        Self {
            timestamp: r.timestamp_s,
            normal_load: r.normal_load,
            drawbar_pull: r.drawbar_pull,
            driving_torque: r.torque,
            commanded_slip: r.commanded_slip,
            measured_sinkage: r.sinkage_m,
            soil_name: r.soil,
        }
    }
}

/// CSV text of a log. Floats are written in shortest round-trip form.
pub fn to_csv(log: &[MeasurementRecord]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if log.is_empty() {
        w.write_record(HEADER)?;
    }
    for r in log {
        w.serialize(Row::from(r))?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn from_csv(bytes: &[u8]) -> Result<Vec<MeasurementRecord>, csv::Error> {
    let mut r = csv::Reader::from_reader(bytes);
    r.deserialize::<Row>()
        .map(|row| row.map(Into::into))
        .collect()
}

pub fn write_log(path: &Path, log: &[MeasurementRecord]) -> Result<()> {
    let bytes = to_csv(log).map_err(|e| CliError::format(path, e))?;
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read_log(path: &Path) -> Result<Vec<MeasurementRecord>> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let log = from_csv(&bytes).map_err(|e| CliError::format(path, e))?;
    if !wheelprobe_core::record::is_well_formed(&log) {
        return Err(CliError::format(
            path,
            "timestamps decrease or a load is negative",
        ));
    }
    Ok(log)
}
