use num_traits::Float;

use super::VisionError;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Self) -> f64 {
        Float::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Line `normal · p = offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Line2 {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl Line2 {
    /// Through two distinct points.
    pub fn through(a: Point2, b: Point2) -> Option<Self> {
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let len = Float::hypot(dx, dy);
        if !(len > 0.0) {
            return None;
        }
        let normal = [-dy / len, dx / len];
        Some(Self::canonical(normal, normal[0] * a.x + normal[1] * a.y))
    }

    /// Through `point` with direction angle `angle` from +x.
    pub fn from_point_angle(point: Point2, angle: f64) -> Self {
        let normal = [-Float::sin(angle), Float::cos(angle)];
        Self::canonical(normal, normal[0] * point.x + normal[1] * point.y)
    }

    /// Normal made to point towards +y (down in image coordinates), or +x
    /// for vertical lines, so equal lines compare equal.
    fn canonical(normal: [f64; 2], offset: f64) -> Self {
        let flip = normal[1] < 0.0 || (normal[1] == 0.0 && normal[0] < 0.0);
        if flip {
            Self {
                normal: [-normal[0], -normal[1]],
                offset: -offset,
            }
        } else {
            Self { normal, offset }
        }
    }

    pub fn signed_distance(&self, p: Point2) -> f64 {
        self.normal[0] * p.x + self.normal[1] * p.y - self.offset
    }

    pub fn distance(&self, p: Point2) -> f64 {
        Float::abs(self.signed_distance(p))
    }

    /// y on the line at `x`; `None` for vertical lines.
    pub fn y_at(&self, x: f64) -> Option<f64> {
        (Float::abs(self.normal[1]) > 1e-12)
            .then(|| (self.offset - self.normal[0] * x) / self.normal[1])
    }

    /// Direction angle in (−π/2, π/2].
    pub fn angle(&self) -> f64 {
        let a = Float::atan2(-self.normal[0], self.normal[1]);
        let half = core::f64::consts::FRAC_PI_2;
        if a > half {
            a - core::f64::consts::PI
        } else if a <= -half {
            a + core::f64::consts::PI
        } else {
            a
        }
    }

    /// Total least squares fit; `None` for fewer than two distinct points.
    pub fn fit(points: &[Point2]) -> Option<Self> {
        if points.len() < 2 {
            return None;
        }
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.x).sum::<f64>() / n;
        let my = points.iter().map(|p| p.y).sum::<f64>() / n;
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for p in points {
            let (dx, dy) = (p.x - mx, p.y - my);
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        if !(sxx + syy > 0.0) {
            return None;
        }
        let theta = 0.5 * Float::atan2(2.0 * sxy, sxx - syy);
        let normal = [-Float::sin(theta), Float::cos(theta)];
        Some(Self::canonical(normal, normal[0] * mx + normal[1] * my))
    }
}

/// Planar projective transform acting on column vectors `[x, y, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Homography(pub [[f64; 3]; 3]);

impl Homography {
    pub const IDENTITY: Self = Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn apply(&self, p: Point2) -> Point2 {
        let m = &self.0;
        let w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
        Point2::new(
            (m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
            (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w,
        )
    }

    pub fn inverse(&self) -> Option<Self> {
        linalg::invert3(&self.0).map(|m| Self(m).normalized())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self(linalg::mat_mul3(&self.0, &other.0)).normalized()
    }

    /// Scaled so the bottom-right entry is 1 (or unit Frobenius norm when it vanishes).
    pub fn normalized(&self) -> Self {
        let m = self.0;
        let s = if Float::abs(m[2][2]) > 1e-12 {
            m[2][2]
        } else {
            Float::sqrt(m.iter().flatten().map(|v| v * v).sum::<f64>())
        };
        Self(m.map(|row| row.map(|v| v / s)))
    }

    /// Exact transform taking each `src[i]` to `dst[i]`.
    ///
    /// Both quadrilaterals are normalised to zero mean and unit RMS radius
    /// before solving, which keeps the 8×8 system well conditioned at
    /// pixel-sized coordinates.
    pub fn from_correspondences(src: &[Point2; 4], dst: &[Point2; 4]) -> Result<Self, VisionError> {
        check_quad(src)?;
        check_quad(dst)?;
        let (ts, ns) = normalise(src);
        let (td, nd) = normalise(dst);
        let mut a = [[0.0; 8]; 8];
        let mut b = [0.0; 8];
        for i in 0..4 {
            let (x, y) = (ns[i].x, ns[i].y);
            let (u, v) = (nd[i].x, nd[i].y);
            a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y];
            b[2 * i] = u;
            a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y];
            b[2 * i + 1] = v;
        }
        let h = linalg::solve(a, b, 1e-12).ok_or(VisionError::SingularTransform)?;
        let hn = Self([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]]);
        let td_inv = td.inverse().ok_or(VisionError::SingularTransform)?;
        Ok(td_inv.compose(&hn).compose(&ts))
    }
}

/// Rejects repeated or collinear corners and mixed winding.
fn check_quad(q: &[Point2; 4]) -> Result<(), VisionError> {
    let scale = (0..4)
        .map(|i| q[i].distance(q[(i + 1) % 4]))
        .fold(0.0, f64::max);
    if !(scale > 0.0) || q.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(VisionError::DegenerateCorners);
    }
    let mut signs = [0.0; 4];
    for i in 0..4 {
        let (a, b, c) = (q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
        let cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        if Float::abs(cross) <= 1e-9 * scale * scale {
            return Err(VisionError::DegenerateCorners);
        }
        signs[i] = cross;
    }
    if signs.iter().all(|&s| s > 0.0) || signs.iter().all(|&s| s < 0.0) {
        Ok(())
    } else {
        Err(VisionError::WindingOrder)
    }
}

fn normalise(q: &[Point2; 4]) -> (Homography, [Point2; 4]) {
    let cx = q.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let cy = q.iter().map(|p| p.y).sum::<f64>() / 4.0;
    let rms = Float::sqrt(
        q.iter()
            .map(|p| (p.x - cx).powi(2) + (p.y - cy).powi(2))
            .sum::<f64>()
            / 4.0,
    );
    let s = core::f64::consts::SQRT_2 / rms;
    let t = Homography([[s, 0.0, -s * cx], [0.0, s, -s * cy], [0.0, 0.0, 1.0]]);
    (t, q.map(|p| t.apply(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square(x0: f64, y0: f64, side: f64) -> [Point2; 4] {
        [
            Point2::new(x0, y0),
            Point2::new(x0 + side, y0),
            Point2::new(x0 + side, y0 + side),
            Point2::new(x0, y0 + side),
        ]
    }

    #[test]
    fn tls_fit_of_exact_points() {
        let pts: alloc::vec::Vec<_> = (0..20)
            .map(|i| Point2::new(i as f64, 3.0 + 0.5 * i as f64))
            .collect();
        let l = Line2::fit(&pts).unwrap();
        assert!(pts.iter().all(|p| l.distance(*p) < 1e-12));
        assert!((l.angle() - Float::atan(0.5)).abs() < 1e-12);
        assert!((l.y_at(4.0).unwrap() - 5.0).abs() < 1e-12);
        let t = Line2::through(pts[19], pts[0]).unwrap();
        assert!((l.normal[0] - t.normal[0]).abs() < 1e-12 && (l.offset - t.offset).abs() < 1e-12);
        assert!(Line2::fit(&[Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)]).is_none());
    }

    #[test]
    fn through_and_angle_agree() {
        let p = Point2::new(10.0, 20.0);
        for deg in [-80.0f64, -10.0, 0.0, 30.0, 89.0] {
            let a = deg.to_radians();
            let l = Line2::from_point_angle(p, a);
            let q = Point2::new(p.x + 5.0 * a.cos(), p.y + 5.0 * a.sin());
            assert!(l.distance(q) < 1e-12);
            assert!((l.angle() - a).abs() < 1e-12);
        }
    }

    #[test]
    fn square_to_itself_is_identity() {
        let q = square(3.0, 7.0, 40.0);
        let h = Homography::from_correspondences(&q, &q).unwrap();
        for (r, e) in
            h.0.iter()
                .flatten()
                .zip(Homography::IDENTITY.0.iter().flatten())
        {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_quads() {
        let mut q = square(0.0, 0.0, 10.0);
        q[1] = Point2::new(5.0, 0.0);
        q[2] = Point2::new(10.0, 0.0);
        let ok = square(0.0, 0.0, 10.0);
        assert_eq!(
            Homography::from_correspondences(&q, &ok),
            Err(VisionError::DegenerateCorners)
        );
        let mut rep = ok;
        rep[1] = rep[0];
        assert_eq!(
            Homography::from_correspondences(&rep, &ok),
            Err(VisionError::DegenerateCorners)
        );
        let bow = [ok[0], ok[2], ok[1], ok[3]];
        assert_eq!(
            Homography::from_correspondences(&bow, &ok),
            Err(VisionError::WindingOrder)
        );
    }

    proptest! {
        #[test]
        fn recovers_random_homography(
            h01 in -0.2f64..0.2, h10 in -0.2f64..0.2, s in 0.6f64..1.6,
            tx in -50.0f64..50.0, ty in -50.0f64..50.0,
            p0 in -4e-4f64..4e-4, p1 in -4e-4f64..4e-4,
        ) {
            let truth = Homography([[s, h01, tx], [h10, s, ty], [p0, p1, 1.0]]);
            let src = square(200.0, 150.0, 120.0);
            let dst = src.map(|p| truth.apply(p));
            let h = Homography::from_correspondences(&src, &dst).unwrap();
            for (r, e) in h.0.iter().flatten().zip(truth.0.iter().flatten()) {
                prop_assert!((r - e).abs() < 1e-6 * e.abs().max(1.0));
            }
        }
    }
}
