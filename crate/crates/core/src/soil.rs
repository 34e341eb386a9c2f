//! Synthetic soil oracle.
//!
//! A [`SoilResponse`] stands in for a physical sand. Sinkage follows a power
//! law in normal load and drawbar pull saturates exponentially in slip; both
//! carry seeded multiplicative Gaussian noise so that probe protocols can be
//! replayed exactly.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods shadow it under std
use num_traits::Float;

use crate::record::MeasurementRecord;
use crate::seed;

/// Sample rate of the force/vision channels during a drive, Hz.
pub const DRIVE_SAMPLE_RATE_HZ: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SoilError {
    #[error("normal load must be non-negative, got {0} N")]
    NegativeLoad(f64),
    #[error("slip ratio must lie in [0, 1), got {0}")]
    SlipOutOfRange(f64),
    #[error("soil `{soil}`: parameter {field} = {value} is out of range")]
    InvalidParameter {
        soil: String,
        field: &'static str,
        value: f64,
    },
    #[error("wheel geometry must have positive radius and width")]
    InvalidWheel,
    #[error("drive needs positive duration, speed and load")]
    InvalidDrive,
    #[error("unknown soil preset `{0}`")]
    UnknownPreset(String),
    #[error("duplicate soil preset `{0}`")]
    DuplicatePreset(String),
    #[error("preset ordering violated at {load} N: {deeper} must sink more than {shallower}")]
    PresetOrdering {
        load: f64,
        deeper: String,
        shallower: String,
    },
}

/// Ground-truth parametric soil behaviour.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SoilResponse {
    pub name: String,
    /// Power-law gain, m/N^p.
    pub sink_gain: f64,
    /// Power-law exponent p, in (0, 2].
    pub sink_exponent: f64,
    /// Peak traction coefficient, in (0, 1.5].
    pub traction_limit: f64,
    /// Slip-saturation constant, in (0, 1].
    pub shear_rate: f64,
    /// Rolling resistance per newton of load.
    pub rolling_resist: f64,
    /// Relative standard deviation of measurement noise.
    pub noise_sd: f64,
}

impl SoilResponse {
    pub fn validate(&self) -> Result<(), SoilError> {
        let bad = |field, value: f64| SoilError::InvalidParameter {
            soil: self.name.clone(),
            field,
            value,
        };
        let checks: [(&'static str, f64, bool); 6] = [
            ("sink_gain", self.sink_gain, self.sink_gain > 0.0),
            (
                "sink_exponent",
                self.sink_exponent,
                self.sink_exponent > 0.0 && self.sink_exponent <= 2.0,
            ),
            (
                "traction_limit",
                self.traction_limit,
                self.traction_limit > 0.0 && self.traction_limit <= 1.5,
            ),
            (
                "shear_rate",
                self.shear_rate,
                self.shear_rate > 0.0 && self.shear_rate <= 1.0,
            ),
            (
                "rolling_resist",
                self.rolling_resist,
                self.rolling_resist >= 0.0,
            ),
            ("noise_sd", self.noise_sd, self.noise_sd >= 0.0),
        ];
        for (field, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(bad(field, value));
            }
        }
        Ok(())
    }

    /// Copy of this soil with measurement noise switched off.
    pub fn noiseless(&self) -> Self {
        Self {
            noise_sd: 0.0,
            ..self.clone()
        }
    }

    /// Noise-free sinkage K·f^p, m.
    pub fn mean_sinkage(&self, normal_load: f64) -> f64 {
        if normal_load <= 0.0 {
            0.0
        } else {
            self.sink_gain * normal_load.powf(self.sink_exponent)
        }
    }

    /// Noise-free drawbar pull at `slip`, N.
    pub fn mean_drawbar_pull(&self, slip: f64, normal_load: f64) -> f64 {
        normal_load * self.traction_limit * (1.0 - (-slip / self.shear_rate).exp())
            - self.rolling_resist * normal_load
    }

    /// Steady-state slip at which the wheel develops `drawbar_pull`.
    ///
    /// Saturates at 1 when the demand exceeds the available traction.
    pub fn steady_slip(&self, drawbar_pull: f64, normal_load: f64) -> f64 {
        if normal_load <= 0.0 {
            return 1.0;
        }
        let mobilised = (drawbar_pull / normal_load + self.rolling_resist) / self.traction_limit;
        if mobilised <= 0.0 {
            0.0
        } else if mobilised >= 1.0 {
            1.0
        } else {
            (-self.shear_rate * (1.0 - mobilised).ln()).min(1.0)
        }
    }
}

/// Wheel dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WheelGeometry {
    /// Radius, m.
    pub radius: f64,
    /// Width, m.
    pub width: f64,
    /// Grouser pattern density, rendering only.
    #[cfg_attr(feature = "serde", serde(default = "default_pattern_scale"))]
    pub rim_pattern_scale: f64,
}

#[cfg(feature = "serde")]
fn default_pattern_scale() -> f64 {
    1.0
}

impl Default for WheelGeometry {
    fn default() -> Self {
        Self {
            radius: 0.05,
            width: 0.04,
            rim_pattern_scale: 1.0,
        }
    }
}

impl WheelGeometry {
    pub fn validate(&self) -> Result<(), SoilError> {
        if self.radius > 0.0
            && self.width > 0.0
            && self.radius.is_finite()
            && self.width.is_finite()
        {
            Ok(())
        } else {
            Err(SoilError::InvalidWheel)
        }
    }
}

/// Sinkage for one load setpoint: K·f^p·(1 + ε), ε ~ N(0, noise_sd), clamped at 0.
pub fn oracle_sinkage(
    soil: &SoilResponse,
    normal_load: f64,
    rng_seed: u64,
) -> Result<f64, SoilError> {
    if !(normal_load >= 0.0) {
        return Err(SoilError::NegativeLoad(normal_load));
    }
    let mean = soil.mean_sinkage(normal_load);
    Ok((mean * multiplicative_noise(soil.noise_sd, seed::derive(rng_seed, 0))).max(0.0))
}

/// Drawbar pull and driving torque for one shear setpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearResponse {
    /// N.
    pub drawbar_pull: f64,
    /// N·m.
    pub driving_torque: f64,
}

/// Shear response at a commanded slip.
///
/// Drawbar pull is f_N·μ_max·(1 − exp(−s/K_s)) − c_rr·f_N with multiplicative
/// noise; torque is r·(f_DP + c_rr·f_N).
pub fn oracle_shear(
    soil: &SoilResponse,
    wheel: &WheelGeometry,
    slip: f64,
    normal_load: f64,
    rng_seed: u64,
) -> Result<ShearResponse, SoilError> {
    if !(0.0..1.0).contains(&slip) {
        return Err(SoilError::SlipOutOfRange(slip));
    }
    if !(normal_load >= 0.0) {
        return Err(SoilError::NegativeLoad(normal_load));
    }
    let drawbar_pull = soil.mean_drawbar_pull(slip, normal_load)
        * multiplicative_noise(soil.noise_sd, seed::derive(rng_seed, 1));
    Ok(ShearResponse {
        drawbar_pull,
        driving_torque: wheel.radius * (drawbar_pull + soil.rolling_resist * normal_load),
    })
}

fn multiplicative_noise(sd: f64, seed: u64) -> f64 {
    if sd == 0.0 {
        1.0
    } else {
        1.0 + sd * seed::standard_normal(seed)
    }
}

/// Operating point of a simulated rover drive.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DriveSpec {
    /// Load carried by the observed wheel, N.
    pub normal_load: f64,
    /// Commanded wheel surface speed rω, m/s.
    pub commanded_speed: f64,
    /// s.
    pub duration: f64,
    /// Net traction the wheel must deliver, N.
    pub drawbar_demand: f64,
}

/// Simulate a steady drive and log it at [`DRIVE_SAMPLE_RATE_HZ`].
///
/// Each record carries the oracle sinkage at the wheel load and the slip the
/// soil settles at for the drawbar demand, both with independent noise.
pub fn simulate_drive(
    soil: &SoilResponse,
    wheel: &WheelGeometry,
    drive: &DriveSpec,
    rng_seed: u64,
) -> Result<Vec<MeasurementRecord>, SoilError> {
    if !(drive.duration > 0.0 && drive.commanded_speed > 0.0 && drive.normal_load > 0.0) {
        return Err(SoilError::InvalidDrive);
    }
    let count = (drive.duration * DRIVE_SAMPLE_RATE_HZ).round() as usize;
    let slip = soil.steady_slip(drive.drawbar_demand, drive.normal_load);
    let torque = wheel.radius * (drive.drawbar_demand + soil.rolling_resist * drive.normal_load);
    let mut log = Vec::with_capacity(count);
    for i in 0..count {
        let sample_seed = seed::derive(rng_seed, i as u64);
        let realised = (slip * multiplicative_noise(soil.noise_sd, seed::derive(sample_seed, 2)))
            .clamp(0.0, 1.0);
        log.push(MeasurementRecord {
            timestamp: i as f64 / DRIVE_SAMPLE_RATE_HZ,
            normal_load: drive.normal_load,
            drawbar_pull: drive.drawbar_demand,
            driving_torque: torque,
            commanded_slip: realised,
            measured_sinkage: oracle_sinkage(soil, drive.normal_load, sample_seed)?,
            soil_name: soil.name.clone(),
        });
    }
    Ok(log)
}

/// Named soils with the cross-soil ordering desert > garnet > quartz.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SoilPresetLibrary {
    presets: Vec<SoilResponse>,
}

/// Presets whose relative sinkage ordering is enforced, deepest first.
pub const ORDERED_PRESETS: [&str; 3] = ["desert", "garnet", "quartz"];

impl SoilPresetLibrary {
    /// Validate every soil and, when all of [`ORDERED_PRESETS`] are present,
    /// check their noise-free sinkage ordering at every integer load in [20, 70] N.
    pub fn new(presets: Vec<SoilResponse>) -> Result<Self, SoilError> {
        for (i, soil) in presets.iter().enumerate() {
            soil.validate()?;
            if presets[..i].iter().any(|p| p.name == soil.name) {
                return Err(SoilError::DuplicatePreset(soil.name.clone()));
            }
        }
        let lib = Self { presets };
        let ordered: Option<Vec<&SoilResponse>> =
            ORDERED_PRESETS.iter().map(|n| lib.find(n)).collect();
        if let Some(ordered) = ordered {
            for load in 20..=70 {
                let load = load as f64;
                for pair in ordered.windows(2) {
                    if pair[0].mean_sinkage(load) <= pair[1].mean_sinkage(load) {
                        return Err(SoilError::PresetOrdering {
                            load,
                            deeper: pair[0].name.clone(),
                            shallower: pair[1].name.clone(),
                        });
                    }
                }
            }
        }
        Ok(lib)
    }

    fn find(&self, name: &str) -> Option<&SoilResponse> {
        self.presets.iter().find(|p| p.name == name)
    }

    pub fn get(&self, name: &str) -> Result<&SoilResponse, SoilError> {
        self.find(name)
            .ok_or_else(|| SoilError::UnknownPreset(name.into()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.presets.iter().map(|p| p.name.as_str())
    }

    pub fn presets(&self) -> &[SoilResponse] {
        &self.presets
    }
}
