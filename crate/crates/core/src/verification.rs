//! Probe-then-drive consistency check.
//!
//! The bevameter probes the soil several times, each time over fresh ground,
//! and every probe yields a sinkage prediction at the rover's wheel load and
//! a slip prediction at the expected drawbar pull. Each prediction carries
//! the largest in-sample residual of its fit as an uncertainty margin, and
//! the band for a quantity spans all of them. The rover then drives the soil
//! and the check passes when its mean sinkage and mean slip both fall inside
//! their bands.

use alloc::string::String;
use alloc::vec::Vec;

use crate::probe::{
    fit_sinkage_detailed, fit_slip_detailed, predict_sinkage, predict_slip, run_pressure_sinkage,
    run_shear, PressureSinkageProtocol, ProbeError, ShearProtocol,
};
use crate::seed;
use crate::soil::{simulate_drive, DriveSpec, SoilResponse, WheelGeometry};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct VerificationConfig {
    /// Independent probe runs, each over fresh soil.
    pub probe_runs: usize,
    pub pressure: PressureSinkageProtocol,
    pub shear: ShearProtocol,
    /// Normal load on the rover's most loaded wheel, N.
    pub wheel_load: f64,
    /// Drawbar pull at which slip is predicted and driven, N.
    pub expected_drawbar: f64,
    /// Wheel surface speed during the drive, m/s.
    pub drive_speed: f64,
    /// s.
    pub drive_duration: f64,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            probe_runs: 5,
            pressure: PressureSinkageProtocol::default(),
            shear: ShearProtocol::default(),
            wheel_load: 35.0,
            expected_drawbar: 8.0,
            drive_speed: 0.01,
            drive_duration: 5.0,
        }
    }
}

/// Closed prediction interval.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Band {
    pub min: f64,
    pub max: f64,
}

impl Band {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    fn spanning(items: impl Iterator<Item = (f64, f64)>) -> Self {
        let (min, max) = items.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (v, m)| {
            (lo.min(v - m), hi.max(v + m))
        });
        Self { min, max }
    }
}

/// One probe run's predictions and fit margins.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbePrediction {
    /// m.
    pub sinkage: f64,
    /// m.
    pub sinkage_margin: f64,
    pub slip: f64,
    pub slip_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub probe_soil: String,
    pub drive_soil: String,
    pub seed: u64,
    pub predictions: Vec<ProbePrediction>,
    pub sinkage_band: Band,
    pub slip_band: Band,
    /// Mean sinkage over the drive, m.
    pub driven_sinkage: f64,
    pub driven_slip: f64,
    pub sinkage_in_band: bool,
    pub slip_in_band: bool,
    pub pass: bool,
}

/// Probe `probe_soil` `config.probe_runs` times, then drive `drive_soil`.
pub fn run_verification(
    probe_soil: &SoilResponse,
    drive_soil: &SoilResponse,
    wheel: &WheelGeometry,
    config: &VerificationConfig,
    rng_seed: u64,
) -> Result<VerificationReport, ProbeError> {
    if config.probe_runs == 0 {
        return Err(ProbeError::InvalidProtocol("probe_runs must be at least 1"));
    }
    let mut predictions = Vec::with_capacity(config.probe_runs);
    for run in 0..config.probe_runs {
        let run_seed = seed::derive(rng_seed, run as u64);
        let pressure = run_pressure_sinkage(
            probe_soil,
            wheel,
            &config.pressure,
            seed::derive(run_seed, 0),
        )?;
        let shear = run_shear(probe_soil, wheel, &config.shear, seed::derive(run_seed, 1))?;
        let (sink_model, sink_fit) = fit_sinkage_detailed(&pressure)?;
        let (slip_model, slip_fit) = fit_slip_detailed(&shear)?;
        predictions.push(ProbePrediction {
            sinkage: predict_sinkage(&sink_model, config.wheel_load).value,
            sinkage_margin: sink_fit.max_abs_residual,
            slip: predict_slip(&slip_model, config.expected_drawbar).value,
            slip_margin: slip_fit.max_abs_residual,
        });
    }
    let sinkage_band = Band::spanning(predictions.iter().map(|p| (p.sinkage, p.sinkage_margin)));
    let slip_band = Band::spanning(predictions.iter().map(|p| (p.slip, p.slip_margin)));

    let drive = DriveSpec {
        normal_load: config.wheel_load,
        commanded_speed: config.drive_speed,
        duration: config.drive_duration,
        drawbar_demand: config.expected_drawbar,
    };
    let log = simulate_drive(drive_soil, wheel, &drive, seed::derive(rng_seed, u64::MAX))?;
    let n = log.len().max(1) as f64;
    let driven_sinkage = log.iter().map(|r| r.measured_sinkage).sum::<f64>() / n;
    let driven_slip = log.iter().map(|r| r.commanded_slip).sum::<f64>() / n;

    let sinkage_in_band = sinkage_band.contains(driven_sinkage);
    let slip_in_band = slip_band.contains(driven_slip);
    Ok(VerificationReport {
        probe_soil: probe_soil.name.clone(),
        drive_soil: drive_soil.name.clone(),
        seed: rng_seed,
        predictions,
        sinkage_band,
        slip_band,
        driven_sinkage,
        driven_slip,
        sinkage_in_band,
        slip_in_band,
        pass: sinkage_in_band && slip_in_band,
    })
}
