//! Orthonormal 2-D Haar transform used by the wavelet-domain l1 prior.
//!
//! Filters are normalized by 1/sqrt(2) so analysis and synthesis are exact
//! adjoints (`W^H W = W W^H = I`); the sign convention for detail
//! coefficients is `(even - odd) / sqrt(2)`. Coefficients use the standard
//! nested-quadrant multiresolution layout inside an image-shaped buffer.

use crate::error::{FsrError, Result};
use crate::raster::Image;

const SQRT2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Handle to the orthonormal Haar analysis/synthesis pair at a fixed depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarDwt {
    levels: usize,
}

impl HaarDwt {
    pub fn new(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(FsrError::invalid("wavelet depth must be at least 1"));
        }
        Ok(HaarDwt { levels })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Deepest decomposition the given dimensions allow, capped at `cap`.
    pub fn max_levels(rows: usize, cols: usize, cap: usize) -> usize {
        let mut l = 0;
        let (mut r, mut c) = (rows, cols);
        while l < cap && r % 2 == 0 && c % 2 == 0 && r >= 2 && c >= 2 {
            r /= 2;
            c /= 2;
            l += 1;
        }
        l
    }

    pub fn analyze(&self, img: &Image) -> Result<WaveletCoeffs> {
        dwt(img, self.levels)
    }

    pub fn synthesize(&self, coeffs: &WaveletCoeffs) -> Result<Image> {
        idwt(coeffs)
    }
}

/// Wavelet coefficients in the nested-quadrant layout: the level-`L`
/// approximation block sits in the top-left `(rows/2^L) x (cols/2^L)`
/// corner, surrounded by detail blocks per level.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoeffs {
    rows: usize,
    cols: usize,
    levels: usize,
    data: Vec<f64>,
    value_scale: f64,
}

impl WaveletCoeffs {
    pub fn new(rows: usize, cols: usize, levels: usize, data: Vec<f64>) -> Result<Self> {
        check_divisible(rows, cols, levels)?;
        if data.len() != rows * cols {
            return Err(FsrError::dimension("coefficient buffer length mismatch"));
        }
        Ok(WaveletCoeffs { rows, cols, levels, data, value_scale: 1.0 })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Builds coefficients with the same shape metadata but new values.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        let mut c = self.clone();
        if data.len() != c.data.len() {
            return Err(FsrError::dimension("coefficient buffer length mismatch"));
        }
        c.data = data;
        Ok(c)
    }
}

fn check_divisible(rows: usize, cols: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(FsrError::invalid("wavelet depth must be at least 1"));
    }
    let div = 1usize << levels;
    if rows % div != 0 || cols % div != 0 {
        return Err(FsrError::dimension(format!(
            "dims {rows}x{cols} not divisible by 2^{levels}"
        )));
    }
    Ok(())
}

/// Single-level in-place analysis of the leading `r x c` block.
fn analyze_level(data: &mut [f64], stride: usize, r: usize, c: usize, scratch: &mut Vec<f64>) {
    scratch.resize(r.max(c), 0.0);
    // Rows: pairs along each row -> (approx | detail).
    for i in 0..r {
        let row = &mut data[i * stride..i * stride + c];
        let half = c / 2;
        for t in 0..half {
            let a = row[2 * t];
            let b = row[2 * t + 1];
            scratch[t] = (a + b) * SQRT2_INV;
            scratch[half + t] = (a - b) * SQRT2_INV;
        }
        row.copy_from_slice(&scratch[..c]);
    }
    // Columns.
    for j in 0..c {
        let half = r / 2;
        for t in 0..half {
            let a = data[(2 * t) * stride + j];
            let b = data[(2 * t + 1) * stride + j];
            scratch[t] = (a + b) * SQRT2_INV;
            scratch[half + t] = (a - b) * SQRT2_INV;
        }
        for t in 0..r {
            data[t * stride + j] = scratch[t];
        }
    }
}

fn synthesize_level(data: &mut [f64], stride: usize, r: usize, c: usize, scratch: &mut Vec<f64>) {
    scratch.resize(r.max(c), 0.0);
    for j in 0..c {
        let half = r / 2;
        for t in 0..half {
            let a = data[t * stride + j];
            let d = data[(half + t) * stride + j];
            scratch[2 * t] = (a + d) * SQRT2_INV;
            scratch[2 * t + 1] = (a - d) * SQRT2_INV;
        }
        for t in 0..r {
            data[t * stride + j] = scratch[t];
        }
    }
    for i in 0..r {
        let row = &mut data[i * stride..i * stride + c];
        let half = c / 2;
        for t in 0..half {
            let a = row[t];
            let d = row[half + t];
            scratch[2 * t] = (a + d) * SQRT2_INV;
            scratch[2 * t + 1] = (a - d) * SQRT2_INV;
        }
        row.copy_from_slice(&scratch[..c]);
    }
}

/// Orthonormal analysis (`W^H x`).
pub fn dwt(img: &Image, levels: usize) -> Result<WaveletCoeffs> {
    let (rows, cols) = img.dims();
    check_divisible(rows, cols, levels)?;
    let mut data = img.data().to_vec();
    let mut scratch = Vec::new();
    let (mut r, mut c) = (rows, cols);
    for _ in 0..levels {
        analyze_level(&mut data, cols, r, c, &mut scratch);
        r /= 2;
        c /= 2;
    }
    let mut coeffs = WaveletCoeffs::new(rows, cols, levels, data)?;
    coeffs.value_scale = img.value_scale();
    Ok(coeffs)
}

/// Orthonormal synthesis (`W theta`); exact inverse of [`dwt`].
pub fn idwt(coeffs: &WaveletCoeffs) -> Result<Image> {
    let (rows, cols) = coeffs.dims();
    let mut data = coeffs.data().to_vec();
    let mut scratch = Vec::new();
    let div = 1usize << coeffs.levels();
    let (mut r, mut c) = (rows / div, cols / div);
    for _ in 0..coeffs.levels() {
        r *= 2;
        c *= 2;
        synthesize_level(&mut data, cols, r, c, &mut scratch);
    }
    Image::new(rows, cols, data, coeffs.value_scale)
}
