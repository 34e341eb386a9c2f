use super::TraverseError;

/// Robot-specific limits and weights for the traversability score.
///
/// `w1` weights slip and `w2` weights sinkage.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraversabilityParams {
    /// Largest acceptable sinkage, m.
    pub d_max: f64,
    /// Sinkage safety bound, m.
    pub d_min: f64,
    /// Largest acceptable slip ratio.
    pub s_max: f64,
    /// Slip safety bound.
    pub s_min: f64,
    pub w1: f64,
    pub w2: f64,
}

impl TraversabilityParams {
    /// Limits from the robot, safety bounds at 20% of them, equal weights.
    pub fn from_limits(d_max: f64, s_max: f64) -> Self {
        Self {
            d_max,
            d_min: 0.2 * d_max,
            s_max,
            s_min: 0.2 * s_max,
            w1: 0.5,
            w2: 0.5,
        }
    }

    pub fn validate(&self) -> Result<(), TraverseError> {
        let ok = self.d_min >= 0.0
            && self.d_min < self.d_max
            && self.s_min >= 0.0
            && self.s_min < self.s_max
            && self.s_max <= 1.0
            && self.w1 >= 0.0
            && self.w2 >= 0.0
            && (self.w1 + self.w2 - 1.0).abs() <= 1e-9;
        if ok && self.d_max.is_finite() {
            Ok(())
        } else {
            Err(TraverseError::InvalidParams)
        }
    }
}

impl Default for TraversabilityParams {
    fn default() -> Self {
        Self::from_limits(0.02, 0.6)
    }
}

/// Score T ∈ [0, 1] for sinkage `d` (m) and slip `s`.
///
/// Zero when either limit is exceeded, one inside both safety bounds,
/// otherwise 1 − w1·s/s_max − w2·d/d_max clamped into [0, 1].
pub fn traversability_score(
    d: f64,
    s: f64,
    params: &TraversabilityParams,
) -> Result<f64, TraverseError> {
    params.validate()?;
    if !(d >= 0.0) || !(0.0..=1.0).contains(&s) {
        return Err(TraverseError::InvalidPrediction {
            sinkage: d,
            slip: s,
        });
    }
    Ok(if s > params.s_max || d > params.d_max {
        0.0
    } else if s < params.s_min && d < params.d_min {
        1.0
    } else {
        (1.0 - params.w1 * s / params.s_max - params.w2 * d / params.d_max).clamp(0.0, 1.0)
    })
}
