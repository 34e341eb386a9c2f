use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use super::canny::{canny_edges, gaussian_blur, sobel, DEFAULT_HIGH, DEFAULT_LOW};
use super::geometry::Point2;
use super::image::{Plane, RgbImage};
use super::profile::{extract_terrain_profile, LineEstimate, ProfileOptions, Side, TerrainProfile};
use super::rectify::{rectify, RectificationTransform};
use super::segment::{binarize_and_open, otsu_threshold, saturation_channel};
use super::VisionError;
use crate::soil::WheelGeometry;

/// Wheel-terrain contact in the rectified frame.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContactGeometry {
    /// Depth of the front contact below the undisturbed surface, m.
    pub sinkage: f64,
    /// rad.
    pub entry_angle: f64,
    /// rad.
    pub exit_angle: f64,
    /// Rectified pixels.
    pub wheel_center: Point2,
    pub confidence: f64,
}

/// Angles and sinkage from the two terrain lines.
///
/// A line at distance `d` from the centre sinks the wheel by `r − d` and
/// meets the rim at `acos(d / r)` from the bottom; sinkage is taken from the
/// front line and confidence is the weaker inlier ratio.
pub fn contact_geometry(
    front: &LineEstimate,
    rear: &LineEstimate,
    center: Point2,
    radius_px: f64,
    transform: &RectificationTransform,
) -> Result<ContactGeometry, VisionError> {
    if !(radius_px > 0.0) || !(transform.scale > 0.0) {
        return Err(VisionError::InvalidParameter(
            "radius and scale must be positive",
        ));
    }
    let depth = |est: &LineEstimate, side| -> Result<(f64, f64), VisionError> {
        match est.line.y_at(center.x) {
            Some(y) if y > center.y => {
                let d = est.line.distance(center);
                let z = (radius_px - d).max(0.0);
                Ok((
                    z,
                    Float::acos(((radius_px - z) / radius_px).clamp(-1.0, 1.0)),
                ))
            }
            _ => Err(VisionError::LineAboveCenter { side }),
        }
    };
    let (z_front, entry_angle) = depth(front, Side::Front)?;
    let (_, exit_angle) = depth(rear, Side::Rear)?;
    Ok(ContactGeometry {
        sinkage: z_front * transform.scale / 1000.0,
        entry_angle,
        exit_angle,
        wheel_center: center,
        confidence: front.inlier_ratio.min(rear.inlier_ratio),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ContactOptions {
    /// Marker edge length, mm.
    pub marker_size_mm: f64,
    pub canny_low: f64,
    pub canny_high: f64,
    /// Opening disk radius, px.
    pub kernel_radius: usize,
    /// Move edge pixels to the saturation-gradient peak before fitting.
    pub subpixel: bool,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub profile: ProfileOptions,
}

impl Default for ContactOptions {
    fn default() -> Self {
        Self {
            marker_size_mm: 30.0,
            canny_low: DEFAULT_LOW,
            canny_high: DEFAULT_HIGH,
            kernel_radius: 2,
            subpixel: true,
            profile: ProfileOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Stage {
    Rectify,
    Saturation,
    Threshold,
    Morphology,
    Edges,
    Profile,
    Geometry,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Rectify,
        Stage::Saturation,
        Stage::Threshold,
        Stage::Morphology,
        Stage::Edges,
        Stage::Profile,
        Stage::Geometry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Rectify => "rectify",
            Stage::Saturation => "saturation",
            Stage::Threshold => "threshold",
            Stage::Morphology => "morphology",
            Stage::Edges => "edges",
            Stage::Profile => "profile",
            Stage::Geometry => "geometry",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: VisionError,
}

/// Geometry plus the intermediate results worth reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactEstimate {
    pub geometry: ContactGeometry,
    pub transform: RectificationTransform,
    pub threshold: u8,
    pub edge_pixels: usize,
    pub profile: TerrainProfile,
    pub radius_px: f64,
}

pub fn estimate_contact(
    image: &RgbImage,
    marker_corners: &[Point2; 4],
    wheel: &WheelGeometry,
    options: &ContactOptions,
) -> Result<ContactGeometry, PipelineError> {
    estimate_contact_observed(image, marker_corners, wheel, options, &mut |_| {})
        .map(|e| e.geometry)
}

/// As [`estimate_contact`], calling `observer` as each stage completes.
pub fn estimate_contact_observed(
    image: &RgbImage,
    marker_corners: &[Point2; 4],
    wheel: &WheelGeometry,
    options: &ContactOptions,
    observer: &mut dyn FnMut(Stage),
) -> Result<ContactEstimate, PipelineError> {
    let (rect, transform) = finish(
        Stage::Rectify,
        rectify(image, marker_corners, options.marker_size_mm),
        observer,
    )?;
    let sat = finish(Stage::Saturation, Ok(saturation_channel(&rect)), observer)?;
    let threshold = finish(Stage::Threshold, otsu_threshold(&sat), observer)?;
    let mask = finish(
        Stage::Morphology,
        binarize_and_open(&sat, threshold, options.kernel_radius),
        observer,
    )?;
    let edges = finish(
        Stage::Edges,
        canny_edges(&mask.to_gray(), options.canny_low, options.canny_high),
        observer,
    )?;

    let center = transform.marker_center();
    let radius_px = wheel.radius * 1000.0 / transform.scale;
    let points: Vec<Point2> = if options.subpixel {
        refine_edges(&edges.pixels, &Plane::from_gray(&sat))
    } else {
        edges
            .pixels
            .iter()
            .map(|&(x, y)| Point2::new(x as f64, y as f64))
            .collect()
    };
    let profile = finish(
        Stage::Profile,
        extract_terrain_profile(&points, center, radius_px, &options.profile),
        observer,
    )?;
    let geometry = finish(
        Stage::Geometry,
        contact_geometry(&profile.front, &profile.rear, center, radius_px, &transform),
        observer,
    )?;
    Ok(ContactEstimate {
        geometry,
        transform,
        threshold,
        edge_pixels: edges.pixels.len(),
        profile,
        radius_px,
    })
}

fn finish<T>(
    stage: Stage,
    r: Result<T, VisionError>,
    observer: &mut dyn FnMut(Stage),
) -> Result<T, PipelineError> {
    let v = r.map_err(|source| PipelineError { stage, source })?;
    observer(stage);
    Ok(v)
}

/// Slide each edge pixel along the local gradient to the sub-pixel maximum
/// of the smoothed saturation gradient within ±2 px.
fn refine_edges(pixels: &[(usize, usize)], sat: &Plane) -> Vec<Point2> {
    let smooth = gaussian_blur(sat, 1.0);
    let (gx, gy) = sobel(&smooth);
    let mag = Plane {
        width: gx.width,
        height: gx.height,
        data: gx
            .data
            .iter()
            .zip(&gy.data)
            .map(|(a, b)| Float::hypot(*a, *b))
            .collect(),
    };
    pixels
        .iter()
        .map(|&(x, y)| {
            let p = Point2::new(x as f64, y as f64);
            let (ax, ay) = (gx.at(x as isize, y as isize), gy.at(x as isize, y as isize));
            let g = Float::hypot(ax, ay);
            if !(g > 1.0) {
                return p;
            }
            let (nx, ny) = (ax / g, ay / g);
            let m = |k: f64| mag.sample(p.x + k * nx, p.y + k * ny);
            let samples = [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| (k, m(k)));
            let (mut best, mut bi) = (samples[0].1, 0);
            for (i, s) in samples.iter().enumerate() {
                if s.1 > best {
                    best = s.1;
                    bi = i;
                }
            }
            let mut k = samples[bi].0;
            if bi > 0 && bi < 4 {
                let (a, b, c) = (samples[bi - 1].1, samples[bi].1, samples[bi + 1].1);
                let denom = a - 2.0 * b + c;
                if denom < 0.0 {
                    k += (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
                }
            }
            Point2::new(p.x + k * nx, p.y + k * ny)
        })
        .collect()
}
