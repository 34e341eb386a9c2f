//! Fitted sinkage and slip predictors.

use alloc::vec::Vec;

use super::fit::{fit_quadratic, FitError, QuadraticFit};
use super::{PressureSinkageSweep, ShearSweep};

/// Closed interval of the quantity a model was fitted over.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Domain {
    pub min: f64,
    pub max: f64,
}

impl Domain {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }
}

/// Sinkage as a quadratic in normal load: s_k = a·f_N² + b·f_N + c.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SinkageModel {
    /// m/N².
    pub a: f64,
    /// m/N.
    pub b: f64,
    /// m.
    pub c: f64,
    /// Loads covered by the fit, N.
    pub fit_domain: Domain,
    /// m.
    pub rmse: f64,
}

/// Slip ratio as a quadratic in drawbar pull: s_r = a·f_DP² + b·f_DP + c.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SlipModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Drawbar pulls covered by the fit, N.
    pub fit_domain: Domain,
    pub rmse: f64,
}

/// A model evaluation with its range flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub value: f64,
    /// Query lies outside the fitted domain.
    pub extrapolated: bool,
    /// The raw polynomial value was clamped into the valid range.
    pub clamped: bool,
}

fn quadratic(a: f64, b: f64, c: f64, x: f64) -> f64 {
    (a * x + b) * x + c
}

impl SinkageModel {
    /// Raw polynomial value, unclamped.
    pub fn eval(&self, load: f64) -> f64 {
        quadratic(self.a, self.b, self.c, load)
    }

    pub fn slope(&self, load: f64) -> f64 {
        2.0 * self.a * load + self.b
    }
}

impl SlipModel {
    pub fn eval(&self, drawbar_pull: f64) -> f64 {
        quadratic(self.a, self.b, self.c, drawbar_pull)
    }

    pub fn slope(&self, drawbar_pull: f64) -> f64 {
        2.0 * self.a * drawbar_pull + self.b
    }
}

/// Predicted sinkage at `normal_load`, clamped at zero.
pub fn predict_sinkage(model: &SinkageModel, normal_load: f64) -> Prediction {
    let raw = model.eval(normal_load);
    Prediction {
        value: raw.max(0.0),
        extrapolated: !model.fit_domain.contains(normal_load),
        clamped: raw < 0.0,
    }
}

/// Predicted slip ratio at `drawbar_pull`, clamped into [0, 1].
pub fn predict_slip(model: &SlipModel, drawbar_pull: f64) -> Prediction {
    let raw = model.eval(drawbar_pull);
    let value = raw.clamp(0.0, 1.0);
    Prediction {
        value,
        extrapolated: !model.fit_domain.contains(drawbar_pull),
        clamped: value != raw,
    }
}

fn domain_of(xs: impl Iterator<Item = f64>) -> Domain {
    let (min, max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    Domain { min, max }
}

/// Fit the sinkage model on (load, mean sinkage) pairs of a sweep.
pub fn fit_sinkage_model(sweep: &PressureSinkageSweep) -> Result<SinkageModel, FitError> {
    fit_sinkage_detailed(sweep).map(|(model, _)| model)
}

/// As [`fit_sinkage_model`], also returning the full least-squares report.
pub fn fit_sinkage_detailed(
    sweep: &PressureSinkageSweep,
) -> Result<(SinkageModel, QuadraticFit), FitError> {
    let pts: Vec<(f64, f64)> = sweep
        .points
        .iter()
        .map(|p| (p.load, p.mean_sinkage))
        .collect();
    let fit = fit_quadratic(&pts)?;
    let model = SinkageModel {
        a: fit.a,
        b: fit.b,
        c: fit.c,
        fit_domain: domain_of(pts.iter().map(|p| p.0)),
        rmse: fit.rmse,
    };
    Ok((model, fit))
}

/// Fit the slip model on (mean drawbar pull, slip) pairs of a shear sweep.
///
/// Torque is logged by the sweep but not regressed.
pub fn fit_slip_model(sweep: &ShearSweep) -> Result<SlipModel, FitError> {
    fit_slip_detailed(sweep).map(|(model, _)| model)
}

pub fn fit_slip_detailed(sweep: &ShearSweep) -> Result<(SlipModel, QuadraticFit), FitError> {
    let pts: Vec<(f64, f64)> = sweep
        .points
        .iter()
        .map(|p| (p.mean_drawbar_pull, p.slip))
        .collect();
    let fit = fit_quadratic(&pts)?;
    let model = SlipModel {
        a: fit.a,
        b: fit.b,
        c: fit.c,
        fit_domain: domain_of(pts.iter().map(|p| p.0)),
        rmse: fit.rmse,
    };
    Ok((model, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sink(a: f64, b: f64, c: f64) -> SinkageModel {
        SinkageModel {
            a,
            b,
            c,
            fit_domain: Domain {
                min: 20.0,
                max: 70.0,
            },
            rmse: 0.0,
        }
    }

    fn slip(a: f64, b: f64, c: f64) -> SlipModel {
        SlipModel {
            a,
            b,
            c,
            fit_domain: Domain {
                min: 2.0,
                max: 15.0,
            },
            rmse: 0.0,
        }
    }

    #[test]
    fn linear_sinkage() {
        let p = predict_sinkage(&sink(0.0, 1e-4, 0.0), 35.0);
        assert!((p.value - 3.5e-3).abs() < 1e-15);
        assert!(!p.extrapolated && !p.clamped);
    }

    #[test]
    fn sinkage_extrapolation_and_clamp() {
        let p = predict_sinkage(&sink(0.0, 1e-4, 0.0), 80.0);
        assert!((p.value - 8e-3).abs() < 1e-15);
        assert!(p.extrapolated);
        let p = predict_sinkage(&sink(0.0, 1e-4, -0.01), 35.0);
        assert_eq!(p.value, 0.0);
        assert!(p.clamped);
    }

    #[test]
    fn slip_contracts() {
        for f in [0.0, 3.0, 10.0, 100.0] {
            assert_eq!(predict_slip(&slip(0.0, 0.0, 0.3), f).value, 0.3);
        }
        let p = predict_slip(&slip(0.0, 0.1, 0.2), 10.0);
        assert_eq!(p.value, 1.0);
        assert!(p.clamped);
        assert_eq!(predict_slip(&slip(0.01, 0.02, -0.1), 0.0).value, 0.0);
        assert_eq!(predict_slip(&slip(0.01, 0.02, 0.25), 0.0).value, 0.25);
        assert!(predict_slip(&slip(0.0, 0.0, 0.3), 0.0).extrapolated);
    }
}
