use alloc::string::String;

/// One timestamped probe or drive sample.
///
/// For drive logs `commanded_slip` carries the slip ratio realised by the
/// rover (wheel surface speed against body speed) rather than a setpoint.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasurementRecord {
    /// Seconds since the start of the log.
    pub timestamp: f64,
    /// Normal load, N.
    pub normal_load: f64,
    /// Drawbar pull, N.
    pub drawbar_pull: f64,
    /// Driving torque, N·m.
    pub driving_torque: f64,
    pub commanded_slip: f64,
    /// Sinkage, m.
    pub measured_sinkage: f64,
    pub soil_name: String,
}

/// `true` when timestamps never decrease and loads are non-negative.
pub fn is_well_formed(log: &[MeasurementRecord]) -> bool {
    log.windows(2).all(|w| w[0].timestamp <= w[1].timestamp)
        && log.iter().all(|r| r.normal_load >= 0.0)
}
