//! Dense row-major rasters and the validated image types built on them.
//!
//! All pixel math in this crate runs in `f64`. [`GrayImage`] and [`RgbImage`]
//! enforce the `[0, 1]` intensity domain and the 3x3 minimum size that the
//! Sobel operator needs, so downstream code can rely on both without
//! re-checking.

use crate::error::{Error, Result};

/// Minimum width/height for [`GrayImage`] and [`RgbImage`].
pub const MIN_IMAGE_DIM: usize = 3;

/// A plain 2-D grid of `f64` values, row-major, no domain constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Raster {
    /// All-zero raster.
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BadBufferLength {
                len: data.len(),
                width,
                height,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn same_dims(&self, other: &Raster) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Pointwise map into a new raster.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two same-sized rasters.
    pub fn zip_map(&self, other: &Raster, f: impl Fn(f64, f64) -> f64) -> Result<Raster> {
        check_dims(
            (self.width, self.height),
            (other.width, other.height),
        )?;
        Ok(Raster {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

pub(crate) fn check_dims(expected: (usize, usize), got: (usize, usize)) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            expected_width: expected.0,
            expected_height: expected.1,
            width: got.0,
            height: got.1,
        });
    }
    Ok(())
}

fn check_min_dims(width: usize, height: usize) -> Result<()> {
    if width < MIN_IMAGE_DIM || height < MIN_IMAGE_DIM {
        return Err(Error::ImageTooSmall {
            width,
            height,
            min: MIN_IMAGE_DIM,
        });
    }
    Ok(())
}

/// Grayscale image: intensities in `[0, 1]`, at least 3x3.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    raster: Raster,
}

impl GrayImage {
    pub fn new(raster: Raster) -> Result<Self> {
        check_min_dims(raster.width(), raster.height())?;
        for (index, &value) in raster.data().iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::PixelOutOfRange { index, value });
            }
        }
        Ok(Self { raster })
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(Raster::from_vec(width, height, data)?)
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(Raster::constant(width, height, value))
    }

    /// Skips validation; callers must have established the invariants.
    pub(crate) fn from_raster_unchecked(raster: Raster) -> Self {
        debug_assert!(raster.width() >= MIN_IMAGE_DIM && raster.height() >= MIN_IMAGE_DIM);
        debug_assert!(raster.data().iter().all(|v| (0.0..=1.0).contains(v)));
        Self { raster }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.raster.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.raster.height()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.raster.get(x, y)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        self.raster.data()
    }

    #[inline]
    pub fn raster(&self) -> &Raster {
        &self.raster
    }

    pub fn into_raster(self) -> Raster {
        self.raster
    }
}

/// Three-channel raster with no domain constraint; used for intermediate
/// color spaces (log LMS, l-alpha-beta).
#[derive(Clone, Debug, PartialEq)]
pub struct TriRaster {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl TriRaster {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![[0.0; 3]; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BadBufferLength {
                len: data.len(),
                width,
                height,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.data
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// RGB image: channel intensities in `[0, 1]`, at least 3x3.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn from_vec(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BadBufferLength {
                len: data.len(),
                width,
                height,
            });
        }
        check_min_dims(width, height)?;
        for (index, px) in data.iter().enumerate() {
            for &value in px {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::PixelOutOfRange { index, value });
                }
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, px: [f64; 3]) -> Result<Self> {
        Self::from_vec(width, height, vec![px; width * height])
    }

    /// Replicates a grayscale image across the three channels.
    pub fn from_gray(gray: &GrayImage) -> Self {
        Self {
            width: gray.width(),
            height: gray.height(),
            data: gray.data().iter().map(|&v| [v, v, v]).collect(),
        }
    }

    pub(crate) fn from_vec_unchecked(width: usize, height: usize, data: Vec<[f64; 3]>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }
}

/// Per-pixel Sobel gradient magnitudes; every value is nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMap {
    raster: Raster,
}

impl EdgeMap {
    pub fn new(raster: Raster) -> Result<Self> {
        for (index, &value) in raster.data().iter().enumerate() {
            if !(value >= 0.0) {
                return Err(Error::NegativeValue { index, value });
            }
        }
        Ok(Self { raster })
    }

    pub(crate) fn from_raster_unchecked(raster: Raster) -> Self {
        debug_assert!(raster.data().iter().all(|&v| v >= 0.0));
        Self { raster }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.raster.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.raster.height()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.raster.get(x, y)
    }

    #[inline]
    pub fn raster(&self) -> &Raster {
        &self.raster
    }

    pub fn into_raster(self) -> Raster {
        self.raster
    }
}

/// Per-pixel structure discrepancy values; every value is nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct SdMap {
    raster: Raster,
}

impl SdMap {
    pub fn new(raster: Raster) -> Result<Self> {
        for (index, &value) in raster.data().iter().enumerate() {
            if !(value >= 0.0) {
                return Err(Error::NegativeValue { index, value });
            }
        }
        Ok(Self { raster })
    }

    pub(crate) fn from_raster_unchecked(raster: Raster) -> Self {
        debug_assert!(raster.data().iter().all(|&v| v >= 0.0));
        Self { raster }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.raster.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.raster.height()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.raster.get(x, y)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        self.raster.data()
    }

    #[inline]
    pub fn raster(&self) -> &Raster {
        &self.raster
    }

    pub fn into_raster(self) -> Raster {
        self.raster
    }
}

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;

/// Rec. 601 luminance, `0.299 R + 0.587 G + 0.114 B`.
///
/// Evaluated as `B + 0.299 (R - B) + 0.587 (G - B)` so that achromatic pixels
/// (R = G = B) convert bit-exactly; the rounded sum of the three literal
/// weights falls just short of 1.
pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    let data = img
        .data()
        .iter()
        .map(|&[r, g, b]| (b + LUMA_R * (r - b) + LUMA_G * (g - b)).clamp(0.0, 1.0))
        .collect();
    GrayImage::from_raster_unchecked(Raster {
        width: img.width(),
        height: img.height(),
        data,
    })
}
