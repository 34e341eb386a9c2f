use alloc::vec::Vec;

use num_traits::Float;

use super::image::{GrayImage, Plane};
use super::VisionError;

pub const DEFAULT_LOW: f64 = 40.0;
pub const DEFAULT_HIGH: f64 = 120.0;
const SIGMA: f64 = 1.0;

/// Thinned edge pixels, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<(usize, usize)>,
}

impl EdgeMap {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.pixels
            .binary_search_by(|&(px, py)| (py, px).cmp(&(y, x)))
            .is_ok()
    }
}

pub(crate) fn gaussian_blur(src: &Plane, sigma: f64) -> Plane {
    let radius = Float::ceil(3.0 * sigma) as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| Float::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);
    let (w, h) = (src.width, src.height);
    let mut tmp = Plane {
        width: w,
        height: h,
        data: alloc::vec![0.0; w * h],
    };
    for y in 0..h {
        for x in 0..w {
            tmp.data[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, c)| c * src.at(x as isize + k as isize - radius, y as isize))
                .sum();
        }
    }
    let mut out = tmp.clone();
    for y in 0..h {
        for x in 0..w {
            out.data[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, c)| c * tmp.at(x as isize, y as isize + k as isize - radius))
                .sum();
        }
    }
    out
}

/// Sobel gradients scaled by 1/4, so an ideal 0→255 step peaks at 255.
pub(crate) fn sobel(src: &Plane) -> (Plane, Plane) {
    let (w, h) = (src.width, src.height);
    let mut gx = Plane {
        width: w,
        height: h,
        data: alloc::vec![0.0; w * h],
    };
    let mut gy = gx.clone();
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| src.at(x + dx, y + dy);
            let i = y as usize * w + x as usize;
            gx.data[i] =
                (p(1, -1) + 2.0 * p(1, 0) + p(1, 1) - p(-1, -1) - 2.0 * p(-1, 0) - p(-1, 1)) / 4.0;
            gy.data[i] =
                (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1) - p(-1, -1) - 2.0 * p(0, -1) - p(1, -1)) / 4.0;
        }
    }
    (gx, gy)
}

/// Neighbour step along the gradient, quantised to 45°.
fn direction(gx: f64, gy: f64) -> (isize, isize) {
    let mut a = Float::atan2(gy, gx).to_degrees();
    if a < 0.0 {
        a += 180.0;
    }
    if !(22.5..157.5).contains(&a) {
        (1, 0)
    } else if a < 67.5 {
        (1, 1)
    } else if a < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}

/// Gaussian smoothing (σ = 1), Sobel gradient, non-maximum suppression and
/// 8-connected hysteresis between `low` and `high`.
pub fn canny_edges(gray: &GrayImage, low: f64, high: f64) -> Result<EdgeMap, VisionError> {
    if !(0.0 <= low && low < high && high <= 255.0) {
        return Err(VisionError::InvalidThresholds { low, high });
    }
    let (w, h) = (gray.width(), gray.height());
    let smooth = gaussian_blur(&Plane::from_gray(gray), SIGMA);
    let (gx, gy) = sobel(&smooth);
    let mag: Vec<f64> = gx
        .data
        .iter()
        .zip(&gy.data)
        .map(|(a, b)| Float::hypot(*a, *b))
        .collect();
    let m = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    // 0 = suppressed, 1 = weak, 2 = strong.
    let mut class = alloc::vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let v = mag[i];
            if v < low {
                continue;
            }
            let (dx, dy) = direction(gx.data[i], gy.data[i]);
            let (xi, yi) = (x as isize, y as isize);
            // Strict on one side, so a plateau two pixels wide keeps one.
            if v > m(xi - dx, yi - dy) && v >= m(xi + dx, yi + dy) {
                class[i] = if v >= high { 2 } else { 1 };
            }
        }
    }

    let mut keep = alloc::vec![false; w * h];
    let mut stack: Vec<usize> = (0..w * h).filter(|&i| class[i] == 2).collect();
    stack.iter().for_each(|&i| keep[i] = true);
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !keep[j] && class[j] == 1 {
                    keep[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    Ok(EdgeMap {
        width: w,
        height: h,
        pixels: (0..w * h)
            .filter(|&i| keep[i])
            .map(|i| (i % w, i / w))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_no_edges() {
        let img = GrayImage::filled(32, 32, 128).unwrap();
        assert!(canny_edges(&img, DEFAULT_LOW, DEFAULT_HIGH)
            .unwrap()
            .pixels
            .is_empty());
    }

    #[test]
    fn vertical_step_is_one_column() {
        let img = GrayImage::from_fn(40, 30, |x, _| if x < 20 { 0 } else { 255 }).unwrap();
        let e = canny_edges(&img, DEFAULT_LOW, DEFAULT_HIGH).unwrap();
        // The step lies between columns 19 and 20; either may win the tie.
        let col = e.pixels[0].0;
        assert!(col == 19 || col == 20);
        assert_eq!(e.pixels.len(), 30);
        assert!(e.pixels.iter().all(|&(x, _)| x == col));
    }

    #[test]
    fn rejects_bad_thresholds() {
        let img = GrayImage::filled(16, 16, 0).unwrap();
        assert!(canny_edges(&img, 50.0, 50.0).is_err());
        assert!(canny_edges(&img, -1.0, 50.0).is_err());
        assert!(canny_edges(&img, 10.0, 300.0).is_err());
    }

    #[test]
    fn disk_edges_sit_on_circle_and_are_thin() {
        let (cx, cy, r) = (100.0, 100.0, 80.0);
        // 4×4 supersampled coverage for an anti-aliased disk.
        let img = GrayImage::from_fn(200, 200, |x, y| {
            let mut inside = 0;
            for sy in 0..4 {
                for sx in 0..4 {
                    let px = x as f64 + (sx as f64 + 0.5) / 4.0 - 0.5;
                    let py = y as f64 + (sy as f64 + 0.5) / 4.0 - 0.5;
                    if (px - cx).hypot(py - cy) <= r {
                        inside += 1;
                    }
                }
            }
            (inside * 255 / 16) as u8
        })
        .unwrap();
        let e = canny_edges(&img, DEFAULT_LOW, DEFAULT_HIGH).unwrap();
        assert!(e.pixels.len() > 400);
        let near = e
            .pixels
            .iter()
            .filter(|&&(x, y)| ((x as f64 - cx).hypot(y as f64 - cy) - r).abs() <= 1.0)
            .count();
        assert!(
            near as f64 >= 0.95 * e.pixels.len() as f64,
            "{near}/{}",
            e.pixels.len()
        );
        // No 2×2 block is entirely edge.
        for &(x, y) in &e.pixels {
            let block = [(x + 1, y), (x, y + 1), (x + 1, y + 1)];
            assert!(
                !block.iter().all(|&(a, b)| e.contains(a, b)),
                "thick at {x},{y}"
            );
        }
    }
}
