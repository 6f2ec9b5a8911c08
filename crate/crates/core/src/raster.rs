//! Grayscale raster used for objects, noisy objects and reconstructions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major grayscale image of real intensities.
///
/// `width` is the pixel count along a row (p), `height` the number of rows (q).
/// `peak` is the declared dynamic range of the source (255 for 8-bit data);
/// it is metadata only and never clamps stored values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    peak: f64,
    data: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, peak: f64) -> Self {
        Self {
            width,
            height,
            peak,
            data: vec![0.0; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: f64, peak: f64) -> Self {
        Self {
            width,
            height,
            peak,
            data: vec![value; width * height],
        }
    }

    /// Wraps row-major `data`. Fails when the length does not match or a value is not finite.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>, peak: f64) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "buffer of {} values cannot be {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite pixel at index {i}"
            )));
        }
        Ok(Self {
            width,
            height,
            peak,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        peak: f64,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            peak,
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

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn set_peak(&mut self, peak: f64) {
        self.peak = peak;
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Copies the `w`×`h` block whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if x0 + w > self.width || y0 + h > self.height || w == 0 || h == 0 {
            return Err(Error::OutOfRange(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + w]);
        }
        Ok(Self {
            width: w,
            height: h,
            peak: self.peak,
            data,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            peak: self.peak,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn clamp(&mut self, lo: f64, hi: f64) {
        for v in &mut self.data {
            *v = v.clamp(lo, hi);
        }
    }

    pub(crate) fn require_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}
