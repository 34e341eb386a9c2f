//! JSON records for models, detections and rendered fixtures.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use wheelprobe_core::probe::{Domain, SinkageModel, SlipModel};
use wheelprobe_core::vision::render::RenderedScene;
use wheelprobe_core::vision::{ContactGeometry, Point2, SceneSpec, Stage};

use crate::error::{CliError, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::format(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::format(path, e))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Sinkage,
    Slip,
}

/// A fitted quadratic predictor as stored on disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(rename = "type")]
    pub kind: ModelKind,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// [min, max] of the fitted abscissa.
    pub domain: [f64; 2],
    pub rmse: f64,
}

impl From<&SinkageModel> for ModelFile {
    fn from(m: &SinkageModel) -> Self {
        Self {
            kind: ModelKind::Sinkage,
            a: m.a,
            b: m.b,
            c: m.c,
            domain: [m.fit_domain.min, m.fit_domain.max],
            rmse: m.rmse,
        }
    }
}

impl From<&SlipModel> for ModelFile {
    fn from(m: &SlipModel) -> Self {
        Self {
            kind: ModelKind::Slip,
            a: m.a,
            b: m.b,
            c: m.c,
            domain: [m.fit_domain.min, m.fit_domain.max],
            rmse: m.rmse,
        }
    }
}

impl ModelFile {
    fn domain(&self) -> Domain {
        Domain {
            min: self.domain[0],
            max: self.domain[1],
        }
    }

    pub fn sinkage(&self) -> Option<SinkageModel> {
        (self.kind == ModelKind::Sinkage).then(|| SinkageModel {
            a: self.a,
            b: self.b,
            c: self.c,
            fit_domain: self.domain(),
            rmse: self.rmse,
        })
    }

    pub fn slip(&self) -> Option<SlipModel> {
        (self.kind == ModelKind::Slip).then(|| SlipModel {
            a: self.a,
            b: self.b,
            c: self.c,
            fit_domain: self.domain(),
            rmse: self.rmse,
        })
    }
}

/// Wall-clock time spent in each pipeline stage, ms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub rectify: f64,
    pub saturation: f64,
    pub threshold: f64,
    pub morphology: f64,
    pub edges: f64,
    pub profile: f64,
    pub geometry: f64,
}

impl StageTimings {
    pub fn set(&mut self, stage: Stage, ms: f64) {
        let slot = match stage {
            Stage::Rectify => &mut self.rectify,
            Stage::Saturation => &mut self.saturation,
            Stage::Threshold => &mut self.threshold,
            Stage::Morphology => &mut self.morphology,
            Stage::Edges => &mut self.edges,
            Stage::Profile => &mut self.profile,
            Stage::Geometry => &mut self.geometry,
        };
        *slot = ms;
    }

    pub fn total(&self) -> f64 {
        self.rectify
            + self.saturation
            + self.threshold
            + self.morphology
            + self.edges
            + self.profile
            + self.geometry
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub sinkage_mm: f64,
    pub entry_angle_deg: f64,
    pub exit_angle_deg: f64,
    pub confidence: f64,
    pub stage_timings_ms: StageTimings,
}

impl DetectionRecord {
    pub fn new(g: &ContactGeometry, stage_timings_ms: StageTimings) -> Self {
        Self {
            sinkage_mm: g.sinkage * 1000.0,
            entry_angle_deg: g.entry_angle.to_degrees(),
            exit_angle_deg: g.exit_angle.to_degrees(),
            confidence: g.confidence,
            stage_timings_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub sinkage_mm: f64,
    pub entry_angle_deg: f64,
    pub exit_angle_deg: f64,
}

/// Sidecar of a rendered image: how it was made and what it shows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    /// Image file name, relative to the sidecar.
    pub image: String,
    pub spec: SceneSpec,
    /// Observed marker corners, TL, TR, BR, BL.
    pub marker_corners: [Point2; 4],
    pub truth: TruthRecord,
}

impl FixtureRecord {
    pub fn new(image: String, spec: SceneSpec, scene: &RenderedScene) -> Self {
        let t = &scene.truth;
        Self {
            image,
            spec,
            marker_corners: scene.marker_corners,
            truth: TruthRecord {
                sinkage_mm: t.sinkage * 1000.0,
                entry_angle_deg: t.entry_angle.to_degrees(),
                exit_angle_deg: t.exit_angle.to_degrees(),
            },
        }
    }
}

/// Marker corners as a fixture sidecar or a bare list; each corner may be
/// `{x, y}` or `[x, y]`.
#[derive(Deserialize)]
#[serde(untagged)]
enum CornersFile {
    Record { marker_corners: [Point2; 4] },
    Points([Point2; 4]),
}

pub fn read_corners(path: &Path) -> Result<[Point2; 4]> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let parsed: CornersFile = serde_json::from_slice(&bytes).map_err(|_| {
        CliError::format(
            path,
            "expected four marker corners (TL, TR, BR, BL) as {x, y} objects, [x, y] pairs or a `marker_corners` field",
        )
    })?;
    Ok(match parsed {
        CornersFile::Record { marker_corners } => marker_corners,
        CornersFile::Points(p) => p,
    })
}
