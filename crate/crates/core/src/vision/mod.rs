//! Contact estimation from a side view of a marker-carrying wheel.
//!
//! The image is rectified on the marker, reduced to its saturation channel
//! (sand is strongly coloured, the wheel and most backgrounds are not),
//! binarised with Otsu's threshold and cleaned by opening. Canny edges of the
//! mask outside the wheel disk are fitted with one robust line ahead of and
//! one behind the wheel, and the lines' distances from the marker centre give
//! sinkage and the contact angles.

pub mod canny;
pub mod contact;
pub mod geometry;
pub mod image;
pub mod profile;
pub mod rectify;
pub mod render;
pub mod segment;

pub use canny::{canny_edges, EdgeMap};
pub use contact::{
    contact_geometry, estimate_contact, estimate_contact_observed, ContactEstimate,
    ContactGeometry, ContactOptions, PipelineError, Stage,
};
pub use geometry::{Homography, Line2, Point2};
pub use image::{GrayImage, Mask, Raster, RgbImage};
pub use profile::{
    extract_terrain_profile, fit_line_ransac, LineEstimate, ProfileOptions, Side, TerrainProfile,
};
pub use rectify::{rectify, rectify_with, RectificationTransform, RectifyOptions};
pub use render::{random_scene, render_scene, Background, RenderedScene, SceneSpec};
pub use segment::{binarize_and_open, otsu_threshold, saturation_channel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VisionError {
    #[error("image is {width}x{height}; both sides must be at least {min} px", min = image::MIN_IMAGE_SIZE)]
    ImageSize { width: usize, height: usize },
    #[error("expected {expected} pixels, got {got}")]
    PixelCount { expected: usize, got: usize },
    #[error("marker corners are repeated or collinear")]
    DegenerateCorners,
    #[error("marker corners are not in a consistent winding order")]
    WindingOrder,
    #[error("transform is singular")]
    SingularTransform,
    #[error("histogram has a single occupied level")]
    DegenerateHistogram,
    #[error("edge thresholds must satisfy 0 <= low < high <= 255 (low {low}, high {high})")]
    InvalidThresholds { low: f64, high: f64 },
    #[error("{0}")]
    InvalidParameter(&'static str),
    #[error("invalid scene: {0}")]
    InvalidScene(&'static str),
    #[error("{side:?} terrain line not found: {inliers} inliers among {candidates} candidates")]
    Detection {
        side: Side,
        candidates: usize,
        inliers: usize,
    },
    #[error("{side:?} terrain line passes above the wheel centre")]
    LineAboveCenter { side: Side },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soil::WheelGeometry;

    fn relative_error(spec: &SceneSpec) -> f64 {
        let scene = render_scene(spec).unwrap();
        let est = estimate_contact(
            &scene.image,
            &scene.marker_corners,
            &spec.wheel,
            &ContactOptions::default(),
        )
        .unwrap();
        (est.sinkage - spec.true_sinkage).abs() / spec.true_sinkage
    }

    #[test]
    fn default_scene_within_five_percent() {
        let e = relative_error(&SceneSpec::default());
        assert!(e <= 0.05, "{e}");
    }

    #[test]
    fn lighting_and_clutter_within_five_percent() {
        for gain in [0.5, 1.0, 1.5] {
            for background in [Background::Plain, Background::Cluttered] {
                let spec = SceneSpec {
                    illumination_gain: gain,
                    background,
                    ..SceneSpec::default()
                };
                let e = relative_error(&spec);
                assert!(e <= 0.05, "gain {gain} {background:?}: {e}");
            }
        }
    }

    #[test]
    fn flat_terrain_lines_match_truth() {
        let spec = SceneSpec {
            rut_depth: 0.0,
            ..SceneSpec::default()
        };
        let scene = render_scene(&spec).unwrap();
        let est = estimate_contact_observed(
            &scene.image,
            &scene.marker_corners,
            &spec.wheel,
            &ContactOptions::default(),
            &mut |_| {},
        )
        .unwrap();
        for found in [est.profile.front.line, est.profile.rear.line] {
            let x = 320.0;
            let dy = found.y_at(x).unwrap() - scene.front_line.y_at(x).unwrap();
            assert!(dy.abs() <= 0.5, "offset {dy}");
            assert!(found.angle().abs().to_degrees() <= 0.5);
        }
    }

    #[test]
    fn deterministic_and_reports_every_stage() {
        let scene = render_scene(&random_scene(9)).unwrap();
        let w = WheelGeometry::default();
        let mut seen = alloc::vec::Vec::new();
        let a = estimate_contact_observed(
            &scene.image,
            &scene.marker_corners,
            &w,
            &ContactOptions::default(),
            &mut |s| seen.push(s),
        )
        .unwrap();
        let b = estimate_contact(
            &scene.image,
            &scene.marker_corners,
            &w,
            &ContactOptions::default(),
        )
        .unwrap();
        assert_eq!(a.geometry, b);
        assert_eq!(seen, Stage::ALL);
    }

    #[test]
    fn featureless_image_fails_with_stage() {
        let img = RgbImage::filled(64, 64, [90, 90, 90]).unwrap();
        let corners = [
            Point2::new(20.0, 20.0),
            Point2::new(40.0, 20.0),
            Point2::new(40.0, 40.0),
            Point2::new(20.0, 40.0),
        ];
        let err = estimate_contact(
            &img,
            &corners,
            &WheelGeometry::default(),
            &ContactOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err.stage, Stage::Threshold);
    }
}
