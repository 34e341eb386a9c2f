//! Bevameter probe protocols and the quadratic mobility predictors.
//!
//! Two protocols are run against a soil:
//!
//! * pressure-sinkage: normal load stepped from 20 N to 70 N in 5 N
//!   increments, every setpoint repeated over freshly prepared soil and
//!   averaged;
//! * shear: fixed 35 N load, carriage driven at 0.01 m/s, wheel speed set so
//!   the slip ratio takes each value 0.1, 0.2, …, 0.8.
//!
//! The averaged sweeps feed [`fit_sinkage_model`] and [`fit_slip_model`].

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods shadow it under std
use num_traits::Float;

use crate::record::MeasurementRecord;
use crate::seed;
use crate::soil::{oracle_shear, oracle_sinkage, SoilError, SoilResponse, WheelGeometry};

mod fit;
mod model;

pub use fit::{fit_quadratic, FitError, QuadraticFit, CONDITION_WARNING};
pub use model::{
    fit_sinkage_detailed, fit_sinkage_model, fit_slip_detailed, fit_slip_model, predict_sinkage,
    predict_slip, Domain, Prediction, SinkageModel, SlipModel,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProbeError {
    #[error("slip ratio is undefined when both wheel surface speed and body speed are zero")]
    UndefinedSlip,
    #[error("invalid protocol: {0}")]
    InvalidProtocol(&'static str),
    #[error("slip setpoint {0} is outside (0, 1)")]
    SlipSetpoint(f64),
    #[error("measurement log is empty or mixes soils")]
    BadLog,
    #[error(transparent)]
    Soil(#[from] SoilError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Normalised mismatch between wheel surface speed rω and body speed v.
///
/// Driving branch (rω − v)/rω when |rω| > |v|, braking branch (v − rω)/v when
/// |v| > |rω|, zero when they agree.
pub fn slip_ratio(radius: f64, wheel_speed: f64, body_speed: f64) -> Result<f64, ProbeError> {
    let surface = radius * wheel_speed;
    if surface == 0.0 && body_speed == 0.0 {
        return Err(ProbeError::UndefinedSlip);
    }
    Ok(if surface.abs() > body_speed.abs() {
        (surface - body_speed) / surface
    } else if body_speed.abs() > surface.abs() {
        (body_speed - surface) / body_speed
    } else {
        0.0
    })
}

/// Wheel speed that realises `slip` at carriage speed `body_speed`, rad/s.
pub fn wheel_speed_for_slip(radius: f64, body_speed: f64, slip: f64) -> Result<f64, ProbeError> {
    if !(0.0..1.0).contains(&slip) {
        return Err(ProbeError::SlipSetpoint(slip));
    }
    Ok(body_speed / (radius * (1.0 - slip)))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PressureSinkageProtocol {
    /// N.
    pub load_min: f64,
    /// N.
    pub load_max: f64,
    /// N.
    pub load_step: f64,
    pub repetitions: usize,
    /// Hz.
    pub sample_rate: f64,
}

impl Default for PressureSinkageProtocol {
    fn default() -> Self {
        Self {
            load_min: 20.0,
            load_max: 70.0,
            load_step: 5.0,
            repetitions: 3,
            sample_rate: 100.0,
        }
    }
}

impl PressureSinkageProtocol {
    pub fn validate(&self) -> Result<(), ProbeError> {
        if !(self.load_min >= 0.0 && self.load_min < self.load_max) {
            return Err(ProbeError::InvalidProtocol("need 0 <= load_min < load_max"));
        }
        if !(self.load_step > 0.0) {
            return Err(ProbeError::InvalidProtocol("load_step must be positive"));
        }
        if self.repetitions == 0 {
            return Err(ProbeError::InvalidProtocol(
                "repetitions must be at least 1",
            ));
        }
        if !(self.sample_rate > 0.0) {
            return Err(ProbeError::InvalidProtocol("sample_rate must be positive"));
        }
        Ok(())
    }

    /// load_min, load_min + step, … up to load_max inclusive.
    pub fn setpoints(&self) -> Vec<f64> {
        let steps = ((self.load_max - self.load_min) / self.load_step + 1e-9).floor() as usize;
        (0..=steps)
            .map(|k| self.load_min + k as f64 * self.load_step)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ShearProtocol {
    /// N.
    pub normal_load: f64,
    /// Carriage speed, m/s.
    pub forward_speed: f64,
    pub slip_values: Vec<f64>,
    pub repetitions: usize,
}

impl Default for ShearProtocol {
    fn default() -> Self {
        Self {
            normal_load: 35.0,
            forward_speed: 0.01,
            slip_values: (1..=8).map(|k| k as f64 / 10.0).collect(),
            repetitions: 3,
        }
    }
}

impl ShearProtocol {
    pub fn validate(&self) -> Result<(), ProbeError> {
        if !(self.normal_load > 0.0) {
            return Err(ProbeError::InvalidProtocol("normal_load must be positive"));
        }
        if !(self.forward_speed > 0.0) {
            return Err(ProbeError::InvalidProtocol(
                "forward_speed must be positive",
            ));
        }
        if self.repetitions == 0 {
            return Err(ProbeError::InvalidProtocol(
                "repetitions must be at least 1",
            ));
        }
        if self.slip_values.is_empty() {
            return Err(ProbeError::InvalidProtocol("no slip setpoints"));
        }
        if let Some(&s) = self.slip_values.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
            return Err(ProbeError::SlipSetpoint(s));
        }
        Ok(())
    }
}

/// Averaged sinkage at one load setpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SinkagePoint {
    /// N.
    pub load: f64,
    /// m.
    pub mean_sinkage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureSinkageSweep {
    pub soil_name: String,
    pub points: Vec<SinkagePoint>,
    pub log: Vec<MeasurementRecord>,
}

/// Averaged shear response at one slip setpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShearPoint {
    pub slip: f64,
    /// Commanded wheel speed, rad/s.
    pub wheel_speed: f64,
    /// N.
    pub mean_drawbar_pull: f64,
    /// N·m.
    pub mean_torque: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShearSweep {
    pub soil_name: String,
    pub normal_load: f64,
    pub points: Vec<ShearPoint>,
    pub log: Vec<MeasurementRecord>,
}

/// Run the pressure-sinkage protocol.
///
/// Repetition `r` of setpoint `k` draws from its own sub-seed, modelling the
/// soil being loosened and flattened between runs. The log is ordered by
/// repetition, then setpoint.
pub fn run_pressure_sinkage(
    soil: &SoilResponse,
    _wheel: &WheelGeometry,
    protocol: &PressureSinkageProtocol,
    rng_seed: u64,
) -> Result<PressureSinkageSweep, ProbeError> {
    protocol.validate()?;
    soil.validate()?;
    let loads = protocol.setpoints();
    let mut sums = alloc::vec![0.0; loads.len()];
    let mut log = Vec::with_capacity(loads.len() * protocol.repetitions);
    for rep in 0..protocol.repetitions {
        let rep_seed = seed::derive(rng_seed, rep as u64);
        for (k, &load) in loads.iter().enumerate() {
            let z = oracle_sinkage(soil, load, seed::derive(rep_seed, k as u64))?;
            sums[k] += z;
            log.push(MeasurementRecord {
                timestamp: log.len() as f64 / protocol.sample_rate,
                normal_load: load,
                drawbar_pull: 0.0,
                driving_torque: 0.0,
                commanded_slip: 0.0,
                measured_sinkage: z,
                soil_name: soil.name.clone(),
            });
        }
    }
    let reps = protocol.repetitions as f64;
    Ok(PressureSinkageSweep {
        soil_name: soil.name.clone(),
        points: loads
            .iter()
            .zip(&sums)
            .map(|(&load, &sum)| SinkagePoint {
                load,
                mean_sinkage: sum / reps,
            })
            .collect(),
        log,
    })
}

/// Run the shear protocol at the protocol's fixed normal load.
pub fn run_shear(
    soil: &SoilResponse,
    wheel: &WheelGeometry,
    protocol: &ShearProtocol,
    rng_seed: u64,
) -> Result<ShearSweep, ProbeError> {
    protocol.validate()?;
    soil.validate()?;
    wheel.validate()?;
    let n = protocol.slip_values.len();
    let mut pull = alloc::vec![0.0; n];
    let mut torque = alloc::vec![0.0; n];
    let mut log = Vec::with_capacity(n * protocol.repetitions);
    // Timestamps advance by one sample per log row at the force-sensor rate.
    let dt = 1.0 / crate::soil::DRIVE_SAMPLE_RATE_HZ;
    for rep in 0..protocol.repetitions {
        let rep_seed = seed::derive(rng_seed, rep as u64);
        for (k, &slip) in protocol.slip_values.iter().enumerate() {
            let setpoint_seed = seed::derive(rep_seed, k as u64);
            let response = oracle_shear(soil, wheel, slip, protocol.normal_load, setpoint_seed)?;
            let z = oracle_sinkage(soil, protocol.normal_load, seed::derive(setpoint_seed, 7))?;
            pull[k] += response.drawbar_pull;
            torque[k] += response.driving_torque;
            log.push(MeasurementRecord {
                timestamp: log.len() as f64 * dt,
                normal_load: protocol.normal_load,
                drawbar_pull: response.drawbar_pull,
                driving_torque: response.driving_torque,
                commanded_slip: slip,
                measured_sinkage: z,
                soil_name: soil.name.clone(),
            });
        }
    }
    let reps = protocol.repetitions as f64;
    let points = protocol
        .slip_values
        .iter()
        .enumerate()
        .map(|(k, &slip)| {
            Ok(ShearPoint {
                slip,
                wheel_speed: wheel_speed_for_slip(wheel.radius, protocol.forward_speed, slip)?,
                mean_drawbar_pull: pull[k] / reps,
                mean_torque: torque[k] / reps,
            })
        })
        .collect::<Result<Vec<_>, ProbeError>>()?;
    Ok(ShearSweep {
        soil_name: soil.name.clone(),
        normal_load: protocol.normal_load,
        points,
        log,
    })
}

/// Group records by the value `key` picks out, preserving first-seen order.
fn group_by_setpoint(
    log: &[MeasurementRecord],
    key: impl Fn(&MeasurementRecord) -> f64,
) -> Vec<(f64, Vec<&MeasurementRecord>)> {
    let mut groups: Vec<(f64, Vec<&MeasurementRecord>)> = Vec::new();
    for r in log {
        let k = key(r);
        match groups.iter_mut().find(|g| g.0 == k) {
            Some(g) => g.1.push(r),
            None => groups.push((k, alloc::vec![r])),
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    groups
}

fn single_soil(log: &[MeasurementRecord]) -> Result<String, ProbeError> {
    let first = log.first().ok_or(ProbeError::BadLog)?;
    if log.iter().any(|r| r.soil_name != first.soil_name) {
        return Err(ProbeError::BadLog);
    }
    Ok(first.soil_name.clone())
}

impl PressureSinkageSweep {
    /// Rebuild the averaged sweep from a raw log, one point per distinct load.
    pub fn from_log(log: Vec<MeasurementRecord>) -> Result<Self, ProbeError> {
        let soil_name = single_soil(&log)?;
        let points = group_by_setpoint(&log, |r| r.normal_load)
            .into_iter()
            .map(|(load, rs)| SinkagePoint {
                load,
                mean_sinkage: rs.iter().map(|r| r.measured_sinkage).sum::<f64>() / rs.len() as f64,
            })
            .collect();
        Ok(Self {
            soil_name,
            points,
            log,
        })
    }
}

impl ShearSweep {
    /// Rebuild the averaged sweep from a raw log, one point per distinct slip.
    pub fn from_log(
        log: Vec<MeasurementRecord>,
        radius: f64,
        forward_speed: f64,
    ) -> Result<Self, ProbeError> {
        let soil_name = single_soil(&log)?;
        let normal_load = log[0].normal_load;
        let points = group_by_setpoint(&log, |r| r.commanded_slip)
            .into_iter()
            .map(|(slip, rs)| {
                let n = rs.len() as f64;
                Ok(ShearPoint {
                    slip,
                    wheel_speed: wheel_speed_for_slip(radius, forward_speed, slip)?,
                    mean_drawbar_pull: rs.iter().map(|r| r.drawbar_pull).sum::<f64>() / n,
                    mean_torque: rs.iter().map(|r| r.driving_torque).sum::<f64>() / n,
                })
            })
            .collect::<Result<Vec<_>, ProbeError>>()?;
        Ok(Self {
            soil_name,
            normal_load,
            points,
            log,
        })
    }
}
