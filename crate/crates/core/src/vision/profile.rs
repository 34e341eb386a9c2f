use alloc::vec::Vec;

use num_traits::Float;
use rand_distr::{Distribution, Uniform};

use super::geometry::{Line2, Point2};
use super::VisionError;
use crate::seed;

/// Which side of the wheel a terrain line lies on. Travel is towards +x.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Side {
    Front,
    Rear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacOptions {
    pub iterations: usize,
    /// Inlier half-width, px.
    pub inlier_band: f64,
    pub min_inliers: usize,
    pub min_inlier_ratio: f64,
    pub seed: u64,
}

impl Default for RansacOptions {
    fn default() -> Self {
        Self {
            iterations: 300,
            inlier_band: 2.0,
            min_inliers: 10,
            min_inlier_ratio: 0.5,
            seed: 0x5EED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub ransac: RansacOptions,
    /// Edge pixels closer than `radius + disk_margin` to the centre are ignored.
    pub disk_margin: f64,
    /// Search extends this many radii below the wheel bottom.
    pub depth_band: f64,
    /// Search extends this many radii either side of the centre.
    pub lateral_extent: f64,
    /// Keep only the lowest candidate in each pixel column. Sand fills the
    /// image below the surface, so anything above it there is background.
    pub lowest_per_column: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            ransac: RansacOptions::default(),
            disk_margin: 4.0,
            depth_band: 0.15,
            lateral_extent: 2.5,
            lowest_per_column: true,
        }
    }
}

/// Robust line with its consensus statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LineEstimate {
    pub line: Line2,
    pub inliers: usize,
    pub candidates: usize,
    pub inlier_ratio: f64,
}

impl LineEstimate {
    /// A line known exactly, e.g. from ground truth.
    pub fn exact(line: Line2) -> Self {
        Self {
            line,
            inliers: 0,
            candidates: 0,
            inlier_ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TerrainProfile {
    pub front: LineEstimate,
    pub rear: LineEstimate,
}

/// Consensus line fit refined by total least squares on the inliers.
///
/// Ties in consensus keep the earliest hypothesis, so results depend only on
/// the points, their order and the seed.
pub fn fit_line_ransac(
    points: &[Point2],
    opts: &RansacOptions,
    side: Side,
) -> Result<LineEstimate, VisionError> {
    let fail = |inliers| VisionError::Detection {
        side,
        candidates: points.len(),
        inliers,
    };
    if points.len() < opts.min_inliers.max(2) {
        return Err(fail(0));
    }
    let band = opts.inlier_band;
    let count = |l: &Line2| points.iter().filter(|p| l.distance(**p) <= band).count();
    let mut rng = seed::rng(opts.seed);
    let pick = Uniform::new(0, points.len()).map_err(|_| fail(0))?;
    let mut best: Option<(Line2, usize)> = None;
    for _ in 0..opts.iterations {
        let i = pick.sample(&mut rng);
        let j = pick.sample(&mut rng);
        let Some(l) = Line2::through(points[i], points[j]) else {
            continue;
        };
        let n = count(&l);
        if best.map_or(true, |(_, b)| n > b) {
            best = Some((l, n));
        }
    }
    let (mut line, _) = best.ok_or_else(|| fail(0))?;
    // Two refinement passes: the first pulls the line off the sampled pair.
    for _ in 0..2 {
        let inl: Vec<Point2> = points
            .iter()
            .copied()
            .filter(|p| line.distance(*p) <= band)
            .collect();
        match Line2::fit(&inl) {
            Some(l) => line = l,
            None => break,
        }
    }
    let inliers = count(&line);
    let inlier_ratio = inliers as f64 / points.len() as f64;
    if inliers < opts.min_inliers || inlier_ratio < opts.min_inlier_ratio {
        return Err(fail(inliers));
    }
    Ok(LineEstimate {
        line,
        inliers,
        candidates: points.len(),
        inlier_ratio,
    })
}

/// Terrain-boundary candidates either side of the wheel: outside the disk,
/// below the centre and no deeper than `depth_band` radii under the wheel.
pub fn terrain_candidates(
    edges: &[Point2],
    center: Point2,
    radius: f64,
    opts: &ProfileOptions,
) -> (Vec<Point2>, Vec<Point2>) {
    let keep = |p: &&Point2| {
        p.distance(center) > radius + opts.disk_margin
            && p.y > center.y
            && p.y <= center.y + radius * (1.0 + opts.depth_band)
            && Float::abs(p.x - center.x) <= opts.lateral_extent * radius
    };
    let mut kept: Vec<Point2> = edges.iter().filter(keep).copied().collect();
    if opts.lowest_per_column {
        kept.sort_by(|a, b| column(a).cmp(&column(b)).then(b.y.total_cmp(&a.y)));
        kept.dedup_by_key(|p| column(p));
    }
    kept.into_iter().partition(|p| p.x > center.x)
}

fn column(p: &Point2) -> i64 {
    Float::round(p.x) as i64
}

pub fn extract_terrain_profile(
    edges: &[Point2],
    center: Point2,
    radius: f64,
    opts: &ProfileOptions,
) -> Result<TerrainProfile, VisionError> {
    if !(radius > 0.0) {
        return Err(VisionError::InvalidParameter("radius must be positive"));
    }
    let (front_pts, rear_pts) = terrain_candidates(edges, center, radius, opts);
    let front = fit_line_ransac(
        &front_pts,
        &RansacOptions {
            seed: seed::derive(opts.ransac.seed, 0),
            ..opts.ransac
        },
        Side::Front,
    )?;
    let rear = fit_line_ransac(
        &rear_pts,
        &RansacOptions {
            seed: seed::derive(opts.ransac.seed, 1),
            ..opts.ransac
        },
        Side::Rear,
    )?;
    Ok(TerrainProfile { front, rear })
}
