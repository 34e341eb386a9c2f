use alloc::vec::Vec;

use super::VisionError;

/// Smallest accepted raster edge, pixels.
pub const MIN_IMAGE_SIZE: usize = 16;

/// Row-major raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    pixels: Vec<T>,
}

pub type RgbImage = Raster<[u8; 3]>;
pub type GrayImage = Raster<u8>;
pub type Mask = Raster<bool>;

impl<T: Copy> Raster<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<T>) -> Result<Self, VisionError> {
        if width < MIN_IMAGE_SIZE || height < MIN_IMAGE_SIZE {
            return Err(VisionError::ImageSize { width, height });
        }
        if pixels.len() != width * height {
            return Err(VisionError::PixelCount {
                expected: width * height,
                got: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self, VisionError> {
        Self::new(width, height, alloc::vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self, VisionError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Same shape, new pixel type. Shape was validated when `self` was built.
    pub fn map<U: Copy>(&self, f: impl FnMut(&T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(f).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<T> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.pixels[y * self.width + x]
    }

    /// Replicates the border outside the raster.
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.pixels[y * self.width + x] = value;
    }
}

impl Mask {
    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    /// 255 for set pixels, 0 otherwise.
    pub fn to_gray(&self) -> GrayImage {
        self.map(|&p| if p { 255 } else { 0 })
    }
}

/// Dense `f64` plane used for intermediate filtering.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn from_gray(gray: &GrayImage) -> Self {
        Self {
            width: gray.width(),
            height: gray.height(),
            data: gray.pixels().iter().map(|&v| f64::from(v)).collect(),
        }
    }

    pub fn at(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    /// Bilinear sample with border replication; pixel centres sit on integers.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        use num_traits::Float;
        let x0 = Float::floor(x);
        let y0 = Float::floor(y);
        let (fx, fy) = (x - x0, y - y0);
        let (ix, iy) = (x0 as isize, y0 as isize);
        let top = self.at(ix, iy) * (1.0 - fx) + self.at(ix + 1, iy) * fx;
        let bottom = self.at(ix, iy + 1) * (1.0 - fx) + self.at(ix + 1, iy + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}
