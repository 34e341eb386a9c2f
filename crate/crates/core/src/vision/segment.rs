//! Saturation extraction, global thresholding and binary clean-up.

use alloc::vec::Vec;

use num_traits::Float;

use super::image::{GrayImage, Mask, RgbImage};
use super::VisionError;

/// HSI saturation scaled to 0..=255; black maps to 0.
pub fn saturation(rgb: [u8; 3]) -> u8 {
    let sum = u32::from(rgb[0]) + u32::from(rgb[1]) + u32::from(rgb[2]);
    if sum == 0 {
        return 0;
    }
    let min = u32::from(rgb[0].min(rgb[1]).min(rgb[2]));
    // S = 1 − min/I with I = sum/3.
    let s = 1.0 - 3.0 * f64::from(min) / f64::from(sum);
    Float::round(s * 255.0) as u8
}

pub fn saturation_channel(image: &RgbImage) -> GrayImage {
    image.map(|&p| saturation(p))
}

/// Threshold maximising between-class variance, classes `≤ t` and `> t`.
///
/// Scores are compared exactly in integer arithmetic, so ties resolve to
/// the lowest threshold regardless of rounding.
pub fn otsu_threshold(gray: &GrayImage) -> Result<u8, VisionError> {
    let mut hist = [0u64; 256];
    for &v in gray.pixels() {
        hist[usize::from(v)] += 1;
    }
    otsu_from_histogram(&hist)
}

pub fn otsu_from_histogram(hist: &[u64; 256]) -> Result<u8, VisionError> {
    let n: u64 = hist.iter().sum();
    let total: u128 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as u128 * u128::from(c))
        .sum();
    let n = u128::from(n);
    let (mut n0, mut s0) = (0u128, 0u128);
    // Between-class variance times N² equals (N·s0 − n0·S)² / (n0·n1).
    let mut best: Option<(u8, u128, u128)> = None;
    for (t, &c) in hist.iter().enumerate() {
        n0 += u128::from(c);
        s0 += t as u128 * u128::from(c);
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = (n * s0).abs_diff(n0 * total);
        let num = diff * diff;
        let den = n0 * n1;
        let better = match best {
            None => true,
            Some((_, bn, bd)) => wide_mul(num, bd) > wide_mul(bn, den),
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }
    best.map(|(t, _, _)| t)
        .ok_or(VisionError::DegenerateHistogram)
}

/// Full 256-bit product as (high, low).
fn wide_mul(a: u128, b: u128) -> (u128, u128) {
    const M: u128 = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & M);
    let (b1, b0) = (b >> 64, b & M);
    let lo = a0 * b0;
    let mid1 = a1 * b0;
    let mid2 = a0 * b1;
    let hi = a1 * b1;
    let (mid, mid_carry) = mid1.overflowing_add(mid2);
    let (lo, lo_carry) = lo.overflowing_add(mid << 64);
    let hi = hi + (mid >> 64) + (u128::from(mid_carry) << 64) + u128::from(lo_carry);
    (hi, lo)
}

/// Offsets of a digital disk of `radius`.
pub fn disk(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Erosion then dilation with a disk.
///
/// Everything outside the raster counts as foreground, so regions touching
/// the border are not eaten away and the operator stays idempotent.
pub fn open(mask: &Mask, radius: usize) -> Mask {
    let se = disk(radius);
    let r = radius as isize;
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let (pw, ph) = (w + 2 * r, h + 2 * r);
    let padded = |x: isize, y: isize| -> bool {
        let (ix, iy) = (x - r, y - r);
        if ix < 0 || iy < 0 || ix >= w || iy >= h {
            true
        } else {
            mask.get(ix as usize, iy as usize)
        }
    };
    let mut eroded = alloc::vec![false; (pw * ph) as usize];
    for y in 0..ph {
        for x in 0..pw {
            eroded[(y * pw + x) as usize] = se.iter().all(|&(dx, dy)| padded(x + dx, y + dy));
        }
    }
    let eroded_at =
        |x: isize, y: isize| x >= 0 && y >= 0 && x < pw && y < ph && eroded[(y * pw + x) as usize];
    mask.map(|_| false).with_pixels(|x, y| {
        let (px, py) = (x as isize + r, y as isize + r);
        se.iter().any(|&(dx, dy)| eroded_at(px + dx, py + dy))
    })
}

impl Mask {
    fn with_pixels(mut self, f: impl Fn(usize, usize) -> bool) -> Self {
        for y in 0..self.height() {
            for x in 0..self.width() {
                self.set(x, y, f(x, y));
            }
        }
        self
    }
}

/// Connected components of pixels equal to `value`, as flat indices.
fn components(mask: &Mask, value: bool, eight: bool) -> Vec<Vec<usize>> {
    let (w, h) = (mask.width(), mask.height());
    let px = mask.pixels();
    let mut seen = alloc::vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if seen[start] || px[start] != value {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Vec::new();
        while let Some(i) = stack.pop() {
            comp.push(i);
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    if (dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0) {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] && px[j] == value {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Drop 8-connected foreground components under `min_area` pixels.
pub fn remove_small_components(mask: &Mask, min_area: usize) -> Mask {
    let mut out = mask.clone();
    for comp in components(mask, true, true) {
        if comp.len() < min_area {
            for i in comp {
                out.set(i % mask.width(), i / mask.width(), false);
            }
        }
    }
    out
}

/// Fill 4-connected background holes under `min_area` pixels that do not
/// touch the border.
pub fn fill_small_holes(mask: &Mask, min_area: usize) -> Mask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = mask.clone();
    for comp in components(mask, false, false) {
        let touches = comp.iter().any(|&i| {
            let (x, y) = (i % w, i / w);
            x == 0 || y == 0 || x == w - 1 || y == h - 1
        });
        if comp.len() < min_area && !touches {
            for i in comp {
                out.set(i % w, i / w, true);
            }
        }
    }
    out
}

/// Foreground is `value > threshold`; opened, then specks and pinholes
/// smaller than the structuring element are removed.
pub fn binarize_and_open(
    gray: &GrayImage,
    threshold: u8,
    kernel_radius: usize,
) -> Result<Mask, VisionError> {
    if kernel_radius == 0 {
        return Err(VisionError::InvalidParameter(
            "kernel radius must be at least 1",
        ));
    }
    let area = disk(kernel_radius).len();
    let binary = gray.map(|&v| v > threshold);
    let opened = open(&binary, kernel_radius);
    Ok(fill_small_holes(
        &remove_small_components(&opened, area),
        area,
    ))
}
