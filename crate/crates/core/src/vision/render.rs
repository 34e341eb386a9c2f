//! Ground-truth scenes of a marker-carrying wheel sunk in sand.
//!
//! Scenes are drawn in a canonical side-on frame (wheel radius 200 px,
//! centre at (320, 150) in a 640×400 image, pixel centres on integers) and
//! then seen through a camera yawed by `viewpoint_tilt`. Each output pixel
//! averages 3×3 sub-samples mapped back into the canonical frame.

use alloc::vec::Vec;

use num_traits::Float;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::contact::ContactGeometry;
use super::geometry::{Homography, Line2, Point2};
use super::image::RgbImage;
use super::VisionError;
use crate::seed;
use crate::soil::WheelGeometry;

pub const SCENE_WIDTH: usize = 640;
pub const SCENE_HEIGHT: usize = 400;
pub const WHEEL_RADIUS_PX: f64 = 200.0;
pub const WHEEL_CENTER: Point2 = Point2::new(320.0, 150.0);
const CAMERA_DISTANCE_PX: f64 = 960.0;
const SUPERSAMPLE: usize = 3;
const SENSOR_NOISE_SD: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Background {
    #[default]
    Plain,
    Cluttered,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SceneSpec {
    pub wheel: WheelGeometry,
    /// m.
    pub true_sinkage: f64,
    /// How far the surface behind the wheel lies below the surface ahead, m.
    pub rut_depth: f64,
    pub illumination_gain: f64,
    pub background: Background,
    /// Camera yaw about the vertical axis, rad.
    pub viewpoint_tilt: f64,
    pub sand_texture_seed: u64,
    /// Marker edge length, m.
    #[cfg_attr(feature = "serde", serde(default = "default_marker"))]
    pub marker_size: f64,
}

fn default_marker() -> f64 {
    0.03
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            wheel: WheelGeometry::default(),
            true_sinkage: 0.008,
            rut_depth: 0.002,
            illumination_gain: 1.0,
            background: Background::Plain,
            viewpoint_tilt: 0.0,
            sand_texture_seed: 1,
            marker_size: default_marker(),
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), VisionError> {
        let r = self.wheel.radius;
        let bad = |msg| Err(VisionError::InvalidScene(msg));
        if self.wheel.validate().is_err() {
            return bad("invalid wheel");
        }
        if !(self.true_sinkage >= 0.0 && self.true_sinkage < r) {
            return bad("true_sinkage must be in [0, radius)");
        }
        // The rear surface must stay inside the profile search band.
        if !(self.rut_depth >= 0.0 && self.rut_depth <= self.true_sinkage + 0.1 * r) {
            return bad("rut_depth must be in [0, true_sinkage + 0.1 radius]");
        }
        if !(self.illumination_gain > 0.0 && self.illumination_gain.is_finite()) {
            return bad("illumination_gain must be positive");
        }
        if !(Float::abs(self.viewpoint_tilt) < 1.0) {
            return bad("viewpoint_tilt must be below 1 rad");
        }
        if !(self.marker_size > 0.0 && self.marker_size / 2.0 < r - self.true_sinkage) {
            return bad("marker must be positive and clear of the sand");
        }
        Ok(())
    }

    /// Canonical pixels per metre.
    pub fn px_per_m(&self) -> f64 {
        WHEEL_RADIUS_PX / self.wheel.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedScene {
    pub image: RgbImage,
    /// Observed marker corners, TL, TR, BR, BL.
    pub marker_corners: [Point2; 4],
    /// In the canonical frame.
    pub truth: ContactGeometry,
    /// Canonical → observed.
    pub view: Homography,
    /// Canonical-frame terrain lines ahead of and behind the wheel.
    pub front_line: Line2,
    pub rear_line: Line2,
}

struct Shape {
    rect: bool,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    color: [f64; 3],
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        if self.rect {
            x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
        } else {
            let (cx, cy) = (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1));
            let r = 0.5 * (self.x1 - self.x0);
            (x - cx).powi(2) + (y - cy).powi(2) <= r * r
        }
    }
}

struct Scene {
    r: f64,
    front_y: f64,
    rear_y: f64,
    entry_x: f64,
    exit_x: f64,
    half_marker: f64,
    marker_bits: u16,
    clutter: Vec<Shape>,
    texture_seed: u64,
}

fn unit_hash(seed: u64, x: i64, y: i64) -> f64 {
    let h = seed::derive(seed, (x as u64) << 32 ^ (y as u64 & 0xFFFF_FFFF));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

impl Scene {
    fn surface(&self, x: f64) -> f64 {
        if x >= self.entry_x {
            self.front_y
        } else if x <= self.exit_x {
            self.rear_y
        } else {
            let t = (x - self.exit_x) / (self.entry_x - self.exit_x);
            self.rear_y + t * (self.front_y - self.rear_y)
        }
    }

    fn sand(&self, x: f64, y: f64) -> [f64; 3] {
        // Bilinear value noise on a 3 px lattice sets local brightness.
        let (gx, gy) = (x / 3.0, y / 3.0);
        let (ix, iy) = (Float::floor(gx), Float::floor(gy));
        let (fx, fy) = (gx - ix, gy - iy);
        let (ix, iy) = (ix as i64, iy as i64);
        let v = |dx, dy| unit_hash(self.texture_seed, ix + dx, iy + dy);
        let n = (v(0, 0) * (1.0 - fx) + v(1, 0) * fx) * (1.0 - fy)
            + (v(0, 1) * (1.0 - fx) + v(1, 1) * fx) * fy;
        let mut k = 0.8 + 0.4 * n;
        if unit_hash(
            self.texture_seed ^ 0x6A41,
            Float::floor(x) as i64,
            Float::floor(y) as i64,
        ) < 0.03
        {
            k *= 0.6;
        }
        [196.0 * k, 140.0 * k, 72.0 * k]
    }

    fn wheel(&self, x: f64, y: f64, d: f64) -> [f64; 3] {
        let (dx, dy) = (x - WHEEL_CENTER.x, y - WHEEL_CENTER.y);
        let h = self.half_marker;
        if Float::abs(dx) <= h && Float::abs(dy) <= h {
            let border = h / 4.0;
            if Float::abs(dx) > h - border || Float::abs(dy) > h - border {
                return [20.0; 3];
            }
            let cell = (h - border) / 2.0;
            let cx = Float::floor((dx + h - border) / cell).clamp(0.0, 3.0) as u16;
            let cy = Float::floor((dy + h - border) / cell).clamp(0.0, 3.0) as u16;
            return if self.marker_bits >> (cy * 4 + cx) & 1 == 1 {
                [235.0; 3]
            } else {
                [25.0; 3]
            };
        }
        if d > 0.9 * self.r {
            [62.0, 62.0, 65.0]
        } else {
            let spoke = Float::abs(Float::sin(3.0 * Float::atan2(dy, dx))) < 0.12;
            if spoke {
                [105.0, 106.0, 110.0]
            } else {
                [150.0, 152.0, 156.0]
            }
        }
    }

    fn background(&self, x: f64, y: f64) -> [f64; 3] {
        if let Some(s) = self.clutter.iter().find(|s| s.contains(x, y)) {
            return s.color;
        }
        let t = (y / SCENE_HEIGHT as f64).clamp(0.0, 1.0);
        [205.0 - 25.0 * t, 208.0 - 26.0 * t, 214.0 - 26.0 * t]
    }

    fn color(&self, x: f64, y: f64) -> [f64; 3] {
        if y > self.surface(x) {
            return self.sand(x, y);
        }
        let d = Float::hypot(x - WHEEL_CENTER.x, y - WHEEL_CENTER.y);
        if d <= self.r {
            self.wheel(x, y, d)
        } else {
            self.background(x, y)
        }
    }
}

fn hsv(h: f64, s: f64, v: f64) -> [f64; 3] {
    let c = v * s;
    let hp = h * 6.0;
    let x = c * (1.0 - Float::abs(hp % 2.0 - 1.0));
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [(r + m) * 255.0, (g + m) * 255.0, (b + m) * 255.0]
}

fn clutter(seed: u64, max_y: f64) -> Vec<Shape> {
    let mut rng = seed::rng(seed);
    let u = Uniform::new(0.0, 1.0).expect("valid range");
    let mut shapes = Vec::new();
    for _ in 0..14 {
        let mut s = || u.sample(&mut rng);
        let w = 20.0 + 90.0 * s();
        let h = if s() < 0.5 { w } else { 15.0 + 70.0 * s() };
        let rect = s() < 0.6;
        let x0 = -40.0 + (SCENE_WIDTH as f64 + 40.0) * s();
        let y1 = (max_y * s()).max(h.min(max_y));
        let (hue, sat, val) = (s(), 0.5 + 0.45 * s(), 0.45 + 0.5 * s());
        shapes.push(Shape {
            rect,
            x0,
            y0: y1 - if rect { h } else { w },
            x1: x0 + w,
            y1,
            color: hsv(hue, sat, val),
        });
    }
    shapes
}

/// Canonical → observed for a camera yawed by `tilt`.
pub fn view_homography(tilt: f64) -> Homography {
    let (cx, cy) = (SCENE_WIDTH as f64 / 2.0, SCENE_HEIGHT as f64 / 2.0);
    let d = CAMERA_DISTANCE_PX;
    let (s, c) = (Float::sin(tilt), Float::cos(tilt));
    let to_centre = Homography([[1.0, 0.0, -cx], [0.0, 1.0, -cy], [0.0, 0.0, 1.0]]);
    let camera = Homography([[d * c, 0.0, 0.0], [0.0, d, 0.0], [s, 0.0, d]]);
    let back = Homography([[1.0, 0.0, cx], [0.0, 1.0, cy], [0.0, 0.0, 1.0]]);
    back.compose(&camera).compose(&to_centre)
}

pub fn render_scene(spec: &SceneSpec) -> Result<RenderedScene, VisionError> {
    spec.validate()?;
    let k = spec.px_per_m();
    let r = WHEEL_RADIUS_PX;
    let z = spec.true_sinkage * k;
    let rut = spec.rut_depth * k;
    let front_y = WHEEL_CENTER.y + r - z;
    let rear_y = front_y + rut;
    let half_chord = |y: f64| Float::sqrt((r * r - (y - WHEEL_CENTER.y).powi(2)).max(0.0));
    let scene = Scene {
        r,
        front_y,
        rear_y,
        entry_x: WHEEL_CENTER.x + half_chord(front_y),
        exit_x: WHEEL_CENTER.x - half_chord(rear_y),
        half_marker: spec.marker_size * k / 2.0,
        marker_bits: (seed::derive(spec.sand_texture_seed, 7) & 0xFFFF) as u16,
        clutter: match spec.background {
            Background::Plain => Vec::new(),
            Background::Cluttered => {
                clutter(seed::derive(spec.sand_texture_seed, 3), front_y - 0.2 * r)
            }
        },
        texture_seed: seed::derive(spec.sand_texture_seed, 5),
    };

    let view = view_homography(spec.viewpoint_tilt);
    let inverse = view.inverse().ok_or(VisionError::SingularTransform)?;
    let mut noise = seed::rng(seed::derive(spec.sand_texture_seed, 11));
    let n = SUPERSAMPLE as f64;
    let image = RgbImage::from_fn(SCENE_WIDTH, SCENE_HEIGHT, |u, v| {
        let mut acc = [0.0; 3];
        for j in 0..SUPERSAMPLE {
            for i in 0..SUPERSAMPLE {
                let p = Point2::new(
                    u as f64 + (i as f64 + 0.5) / n - 0.5,
                    v as f64 + (j as f64 + 0.5) / n - 0.5,
                );
                let c = inverse.apply(p);
                let col = scene.color(c.x, c.y);
                (0..3).for_each(|ch| acc[ch] += col[ch]);
            }
        }
        acc.map(|a| {
            let e: f64 = StandardNormal.sample(&mut noise);
            Float::round(a / (n * n) * spec.illumination_gain + SENSOR_NOISE_SD * e)
                .clamp(0.0, 255.0) as u8
        })
    })?;

    let h = scene.half_marker;
    let (mx, my) = (WHEEL_CENTER.x, WHEEL_CENTER.y);
    let canonical = [
        Point2::new(mx - h, my - h),
        Point2::new(mx + h, my - h),
        Point2::new(mx + h, my + h),
        Point2::new(mx - h, my + h),
    ];
    let angle = |depth: f64| Float::acos((r - depth) / r);
    Ok(RenderedScene {
        image,
        marker_corners: canonical.map(|p| view.apply(p)),
        truth: ContactGeometry {
            sinkage: spec.true_sinkage,
            entry_angle: angle(z),
            exit_angle: angle((z - rut).max(0.0)),
            wheel_center: WHEEL_CENTER,
            confidence: 1.0,
        },
        view,
        front_line: Line2::from_point_angle(Point2::new(0.0, front_y), 0.0),
        rear_line: Line2::from_point_angle(Point2::new(0.0, rear_y), 0.0),
    })
}

/// Scene drawn from the acceptance envelope: sinkage 6–16 mm, rut up to half
/// the sinkage, gain 0.5–1.5, tilt within ±15°, either background.
pub fn random_scene(rng_seed: u64) -> SceneSpec {
    let mut rng = seed::rng(rng_seed);
    let u = Uniform::new(0.0, 1.0).expect("valid range");
    let mut s = || u.sample(&mut rng);
    let true_sinkage = 0.006 + 0.010 * s();
    SceneSpec {
        wheel: WheelGeometry::default(),
        true_sinkage,
        rut_depth: 0.5 * true_sinkage * s(),
        illumination_gain: 0.5 + s(),
        background: if s() < 0.5 {
            Background::Plain
        } else {
            Background::Cluttered
        },
        viewpoint_tilt: (30.0 * s() - 15.0).to_radians(),
        sand_texture_seed: seed::derive(rng_seed, 1),
        marker_size: default_marker(),
    }
}
