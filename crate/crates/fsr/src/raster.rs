//! The `Image` value type shared by every other module.
//!
//! Samples are double-precision reals stored row-major ("lexicographic"
//! vectorization: index = row * width + col). `value_scale` records the
//! nominal peak intensity of the originating file (255 for 8-bit, 65535 for
//! 16-bit, 1.0 for unit-range data); all operators are linear so processing
//! happens in the file's native scale.

use crate::error::{FsrError, Result};

/// A real-valued 2-D raster.
///
/// Immutable by convention after construction; cloning is cheap enough for
/// the image sizes this crate targets, and sharing `&Image` across threads is
/// safe.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f64>,
    value_scale: f64,
}

impl Image {
    /// Builds an image, validating the type invariants: non-empty dims,
    /// `data.len() == height * width`, all samples finite.
    pub fn new(height: usize, width: usize, data: Vec<f64>, value_scale: f64) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(FsrError::dimension("image dimensions must be at least 1x1"));
        }
        if data.len() != height * width {
            return Err(FsrError::dimension(format!(
                "data length {} does not match {}x{}",
                data.len(),
                height,
                width
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(FsrError::invalid("image contains non-finite samples"));
        }
        if !(value_scale.is_finite() && value_scale > 0.0) {
            return Err(FsrError::invalid("value_scale must be finite and positive"));
        }
        Ok(Image { height, width, data, value_scale })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Image { height, width, data: vec![0.0; height * width], value_scale: 1.0 }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                data.push(f(i, j));
            }
        }
        Image { height, width, data, value_scale: 1.0 }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false // 1x1 minimum is enforced at construction
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn value_scale(&self) -> f64 {
        self.value_scale
    }

    /// Returns a copy with the stated nominal peak intensity.
    pub fn with_value_scale(mut self, scale: f64) -> Self {
        self.value_scale = scale;
        self
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.width + col] = v;
    }

    /// Euclidean norm of the sample vector.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Image {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
            value_scale: self.value_scale,
        }
    }

    /// Elementwise combination with another raster of identical shape.
    pub fn zip(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(FsrError::dimension(format!(
                "cannot combine {}x{} with {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(Image {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
            value_scale: self.value_scale,
        })
    }
}

/// BT.601 full-range luma coefficients.
const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Splits an RGB triple of equal-sized channels into (Y, Cb, Cr).
///
/// BT.601 full-range: Y carries the structure the SR solvers operate on;
/// Cb/Cr are stored with a `0.5 * value_scale` offset so they remain inside
/// `[0, value_scale]` and can be round-tripped through ordinary image files.
pub fn extract_luminance(r: &Image, g: &Image, b: &Image) -> Result<(Image, Image, Image)> {
    if r.dims() != g.dims() || g.dims() != b.dims() {
        return Err(FsrError::dimension("RGB channels must share dimensions"));
    }
    let scale = r.value_scale();
    let offset = 0.5 * scale;
    let n = r.len();
    let mut y = Vec::with_capacity(n);
    let mut cb = Vec::with_capacity(n);
    let mut cr = Vec::with_capacity(n);
    for i in 0..n {
        let (rv, gv, bv) = (r.data()[i], g.data()[i], b.data()[i]);
        let luma = LUMA_R * rv + LUMA_G * gv + LUMA_B * bv;
        y.push(luma);
        cb.push(0.564 * (bv - luma) + offset);
        cr.push(0.713 * (rv - luma) + offset);
    }
    let (h, w) = r.dims();
    Ok((
        Image::new(h, w, y, scale)?,
        Image::new(h, w, cb, scale)?,
        Image::new(h, w, cr, scale)?,
    ))
}

/// Inverse of [`extract_luminance`]; output channels are clipped to
/// `[0, value_scale]`.
pub fn recombine_luminance(y: &Image, cb: &Image, cr: &Image) -> Result<(Image, Image, Image)> {
    if y.dims() != cb.dims() || cb.dims() != cr.dims() {
        return Err(FsrError::dimension("YCbCr channels must share dimensions"));
    }
    let scale = y.value_scale();
    let offset = 0.5 * scale;
    let clip = |v: f64| v.clamp(0.0, scale);
    let n = y.len();
    let mut r = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let luma = y.data()[i];
        let cbv = cb.data()[i] - offset;
        let crv = cr.data()[i] - offset;
        let rv = luma + crv / 0.713;
        let bv = luma + cbv / 0.564;
        let gv = (luma - LUMA_R * rv - LUMA_B * bv) / LUMA_G;
        r.push(clip(rv));
        g.push(clip(gv));
        b.push(clip(bv));
    }
    let (h, w) = y.dims();
    Ok((
        Image::new(h, w, r, scale)?,
        Image::new(h, w, g, scale)?,
        Image::new(h, w, b, scale)?,
    ))
}
