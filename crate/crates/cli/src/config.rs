//! Run configuration and soil presets.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wheelprobe_core::probe::{PressureSinkageProtocol, ShearProtocol};
use wheelprobe_core::traverse::{PlannerConfig, TraversabilityParams};
use wheelprobe_core::verification::VerificationConfig;
use wheelprobe_core::vision::ContactOptions;
use wheelprobe_core::{SoilPresetLibrary, SoilResponse, WheelGeometry, GRAVITY};

use crate::error::{CliError, Result};

/// Presets shipped with the binary.
pub const BUILTIN_PRESETS: &str = include_str!("../presets/soils.json");

/// Allowed shortfall of the configured wheel load below mass·g/4.
pub const WHEEL_LOAD_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotConfig {
    /// kg.
    pub mass: f64,
    pub wheel: WheelGeometry,
    /// Load on the most loaded wheel, N. Predictions use this rather than the
    /// average so they err on the safe side.
    pub wheel_load: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self {
            mass: 14.0,
            wheel: WheelGeometry::default(),
            wheel_load: 35.0,
        }
    }
}

impl RobotConfig {
    /// Average static load per wheel of a four-wheeled robot, N.
    pub fn mean_wheel_load(&self) -> f64 {
        self.mass * GRAVITY / 4.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    pub probe_runs: usize,
    /// m/s.
    pub speed: f64,
    /// s.
    pub duration: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        let v = VerificationConfig::default();
        Self {
            probe_runs: v.probe_runs,
            speed: v.drive_speed,
            duration: v.drive_duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Soil preset file; the built-in presets when absent.
    pub presets: Option<PathBuf>,
    pub robot: RobotConfig,
    pub pressure: PressureSinkageProtocol,
    pub shear: ShearProtocol,
    pub traversability: TraversabilityParams,
    pub planner: PlannerConfig,
    /// Drawbar pull at which slip is predicted, N.
    pub expected_drawbar: f64,
    pub vision: ContactOptions,
    pub verification: DriveConfig,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            presets: None,
            robot: RobotConfig::default(),
            pressure: PressureSinkageProtocol::default(),
            shear: ShearProtocol::default(),
            traversability: TraversabilityParams::default(),
            planner: PlannerConfig::default(),
            expected_drawbar: VerificationConfig::default().expected_drawbar,
            vision: ContactOptions::default(),
            verification: DriveConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.robot;
        if !(r.mass > 0.0 && r.mass.is_finite()) {
            return Err(CliError::Config(format!(
                "robot mass must be positive, got {}",
                r.mass
            )));
        }
        r.wheel.validate()?;
        let mean = r.mean_wheel_load();
        if !(r.wheel_load >= mean * (1.0 - WHEEL_LOAD_TOLERANCE)) || !r.wheel_load.is_finite() {
            return Err(CliError::Config(format!(
                "wheel_load {} N is below the average wheel load {mean:.2} N of a {} kg robot",
                r.wheel_load, r.mass
            )));
        }
        self.pressure.validate()?;
        self.shear.validate()?;
        self.traversability.validate()?;
        if !(self.planner.risk_weight >= 0.0 && self.planner.risk_weight.is_finite()) {
            return Err(CliError::Config(
                "planner risk_weight must be non-negative".into(),
            ));
        }
        if !(self.expected_drawbar >= 0.0 && self.expected_drawbar.is_finite()) {
            return Err(CliError::Config(
                "expected_drawbar must be non-negative".into(),
            ));
        }
        if self.verification.probe_runs == 0 {
            return Err(CliError::Config(
                "verification probe_runs must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn presets(&self) -> Result<SoilPresetLibrary> {
        match &self.presets {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                parse_presets(&text).map_err(|e| match e {
                    CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                    other => other,
                })
            }
            None => parse_presets(BUILTIN_PRESETS),
        }
    }

    pub fn soil(&self, name: &str) -> Result<SoilResponse> {
        Ok(self.presets()?.get(name)?.clone())
    }

    pub fn verification_config(&self) -> VerificationConfig {
        VerificationConfig {
            probe_runs: self.verification.probe_runs,
            pressure: self.pressure.clone(),
            shear: self.shear.clone(),
            wheel_load: self.robot.wheel_load,
            expected_drawbar: self.expected_drawbar,
            drive_speed: self.verification.speed,
            drive_duration: self.verification.duration,
        }
    }
}

pub fn parse_presets(text: &str) -> Result<SoilPresetLibrary> {
    let soils: Vec<SoilResponse> =
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(SoilPresetLibrary::new(soils)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_wheel_load_matches_robot_weight() {
        let r = RobotConfig::default();
        let rel = (r.wheel_load - r.mean_wheel_load()).abs() / r.mean_wheel_load();
        assert!(rel <= WHEEL_LOAD_TOLERANCE, "{rel}");
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn builtin_presets_parse_in_order() {
        let lib = RunConfig::default().presets().unwrap();
        let names: Vec<_> = lib.names().collect();
        assert_eq!(names, ["quartz", "garnet", "desert"]);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"seed": 9, "robot": {"mass": 20.0, "wheel_load": 50.0}}"#)
                .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.robot.wheel, WheelGeometry::default());
        assert_eq!(cfg.pressure, PressureSinkageProtocol::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_light_wheel_load_and_unknown_fields() {
        let mut cfg = RunConfig::default();
        cfg.robot.wheel_load = 30.0;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 1}"#).is_err());
    }

    #[test]
    fn unknown_preset_is_config_error() {
        let err = RunConfig::default().soil("basalt").unwrap_err();
        assert_eq!(err.exit_code(), crate::error::exit::CONFIG);
    }
}
