use num_traits::Float;

use super::geometry::{Homography, Point2};
use super::image::{Plane, RgbImage};
use super::VisionError;

/// Maps input pixels into the rectified frame.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RectificationTransform {
    /// Input → rectified.
    pub matrix: Homography,
    /// mm per rectified pixel.
    pub scale: f64,
    /// Marker corners in the rectified frame (TL, TR, BR, BL).
    pub marker_corners: [Point2; 4],
}

impl RectificationTransform {
    pub fn marker_center(&self) -> Point2 {
        let c = &self.marker_corners;
        Point2::new(
            c.iter().map(|p| p.x).sum::<f64>() / 4.0,
            c.iter().map(|p| p.y).sum::<f64>() / 4.0,
        )
    }
}

/// Overrides for the rectified frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RectifyOptions {
    /// Target corners (TL, TR, BR, BL); must be an axis-aligned square.
    /// Default: centred on the input corners' centroid with their mean edge length.
    pub target: Option<[Point2; 4]>,
    /// Output size; default is the input size.
    pub size: Option<(usize, usize)>,
}

/// Warp so the marker corners (TL, TR, BR, BL) become an axis-aligned square.
pub fn rectify(
    image: &RgbImage,
    corners: &[Point2; 4],
    marker_size_mm: f64,
) -> Result<(RgbImage, RectificationTransform), VisionError> {
    rectify_with(image, corners, marker_size_mm, &RectifyOptions::default())
}

pub fn rectify_with(
    image: &RgbImage,
    corners: &[Point2; 4],
    marker_size_mm: f64,
    options: &RectifyOptions,
) -> Result<(RgbImage, RectificationTransform), VisionError> {
    if !(marker_size_mm > 0.0 && marker_size_mm.is_finite()) {
        return Err(VisionError::InvalidParameter(
            "marker size must be positive",
        ));
    }
    let target = match options.target {
        Some(t) => t,
        None => default_target(corners)?,
    };
    let side = target[0].distance(target[1]);
    let matrix = Homography::from_correspondences(corners, &target)?;
    let inverse = matrix.inverse().ok_or(VisionError::SingularTransform)?;
    let (w, h) = options.size.unwrap_or((image.width(), image.height()));

    let channels: [Plane; 3] = core::array::from_fn(|c| Plane {
        width: image.width(),
        height: image.height(),
        data: image.pixels().iter().map(|p| f64::from(p[c])).collect(),
    });
    let out = RgbImage::from_fn(w, h, |x, y| {
        let src = inverse.apply(Point2::new(x as f64, y as f64));
        if !(src.x.is_finite() && src.y.is_finite()) {
            return [0; 3];
        }
        core::array::from_fn(|c| {
            Float::round(channels[c].sample(src.x, src.y)).clamp(0.0, 255.0) as u8
        })
    })?;
    Ok((
        out,
        RectificationTransform {
            matrix,
            scale: marker_size_mm / side,
            marker_corners: target,
        },
    ))
}

fn default_target(corners: &[Point2; 4]) -> Result<[Point2; 4], VisionError> {
    let cx = corners.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let cy = corners.iter().map(|p| p.y).sum::<f64>() / 4.0;
    let side = (0..4)
        .map(|i| corners[i].distance(corners[(i + 1) % 4]))
        .sum::<f64>()
        / 4.0;
    if !(side > 0.0) {
        return Err(VisionError::DegenerateCorners);
    }
    let h = side / 2.0;
    Ok([
        Point2::new(cx - h, cy - h),
        Point2::new(cx + h, cy - h),
        Point2::new(cx + h, cy + h),
        Point2::new(cx - h, cy + h),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern() -> RgbImage {
        RgbImage::from_fn(64, 48, |x, y| {
            [(x * 4) as u8, (y * 5) as u8, ((x * y) % 256) as u8]
        })
        .unwrap()
    }

    fn square(x0: f64, y0: f64, side: f64) -> [Point2; 4] {
        [
            Point2::new(x0, y0),
            Point2::new(x0 + side, y0),
            Point2::new(x0 + side, y0 + side),
            Point2::new(x0, y0 + side),
        ]
    }

    #[test]
    fn axis_aligned_square_is_identity() {
        let img = pattern();
        let (out, t) = rectify(&img, &square(20.0, 10.0, 16.0), 30.0).unwrap();
        assert_eq!(out, img);
        for (r, e) in t
            .matrix
            .0
            .iter()
            .flatten()
            .zip(Homography::IDENTITY.0.iter().flatten())
        {
            assert!((r - e).abs() < 1e-12);
        }
        assert!((t.scale - 30.0 / 16.0).abs() < 1e-12);
        assert_eq!(t.marker_center(), Point2::new(28.0, 18.0));
    }

    #[test]
    fn recovers_inverse_of_synthetic_view() {
        let view = Homography([[0.95, 0.08, 12.0], [-0.05, 1.02, -6.0], [2e-4, -1e-4, 1.0]]);
        let target = square(24.0, 16.0, 16.0);
        let observed = target.map(|p| view.apply(p));
        let opts = RectifyOptions {
            target: Some(target),
            size: None,
        };
        let (_, t) = rectify_with(&pattern(), &observed, 30.0, &opts).unwrap();
        let id = t.matrix.compose(&view);
        for (r, e) in
            id.0.iter()
                .flatten()
                .zip(Homography::IDENTITY.0.iter().flatten())
        {
            assert!((r - e).abs() < 1e-6);
        }
    }

    #[test]
    fn collinear_corners_fail() {
        let c = [
            Point2::new(0.0, 0.0),
            Point2::new(10.0, 10.0),
            Point2::new(20.0, 20.0),
            Point2::new(0.0, 20.0),
        ];
        assert_eq!(
            rectify(&pattern(), &c, 30.0).unwrap_err(),
            VisionError::DegenerateCorners
        );
    }
}
