//! Row-major 2-D FFT built on rustfft's 1-D plans.
//!
//! Convention: `forward` is the plain unnormalized DFT, `inverse` divides by
//! `rows * cols`, so `inverse(forward(x)) == x`. Every spectral operator in
//! this crate is expressed as a per-frequency multiplier under this
//! convention; the sqrt-N factors of the unitary transform cancel in all
//! `F^H (diag) F` sandwiches.

use std::sync::Arc;

use rustfft::{num_complex::Complex, Fft, FftPlanner};

pub type Complex64 = Complex<f64>;

const TRANSPOSE_BLOCK: usize = 32;

/// `dst[c * rows + r] = src[r * cols + c]`, processed in blocks.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for rb in (0..rows).step_by(TRANSPOSE_BLOCK) {
        let r_end = (rb + TRANSPOSE_BLOCK).min(rows);
        for cb in (0..cols).step_by(TRANSPOSE_BLOCK) {
            let c_end = (cb + TRANSPOSE_BLOCK).min(cols);
            for r in rb..r_end {
                for c in cb..c_end {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Reusable 2-D FFT plan for a fixed raster shape.
///
/// The plan itself is immutable and shareable; each call allocates its own
/// scratch, so concurrent use from multiple threads is safe.
pub struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        assert_eq!(buf.len(), self.rows * self.cols, "fft buffer shape mismatch");
        let row_plan = if forward { &self.row_fwd } else { &self.row_inv };
        let col_plan = if forward { &self.col_fwd } else { &self.col_inv };

        let mut scratch = vec![Complex64::new(0.0, 0.0); row_plan.get_inplace_scratch_len()];
        for r in 0..self.rows {
            row_plan.process_with_scratch(&mut buf[r * self.cols..(r + 1) * self.cols], &mut scratch);
        }

        // Column pass as transpose / contiguous FFTs / transpose back; the
        // blocked transpose keeps large rasters cache-friendly.
        let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
        transpose(buf, &mut t, self.rows, self.cols);
        let mut scratch = vec![Complex64::new(0.0, 0.0); col_plan.get_inplace_scratch_len()];
        for c in 0..self.cols {
            col_plan.process_with_scratch(&mut t[c * self.rows..(c + 1) * self.rows], &mut scratch);
        }
        transpose(&t, buf, self.cols, self.rows);
    }

    /// In-place unnormalized forward DFT.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, true);
    }

    /// In-place inverse DFT including the `1/(rows*cols)` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, false);
        let scale = 1.0 / (self.rows * self.cols) as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    /// Forward DFT of a real raster.
    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Inverse DFT returning the real part together with the largest
    /// imaginary residue left behind (callers assert on it when the result
    /// is real by construction).
    pub fn inverse_to_real(&self, mut spec: Vec<Complex64>) -> (Vec<f64>, f64) {
        self.inverse(&mut spec);
        let mut max_im = 0.0f64;
        let data = spec
            .iter()
            .map(|v| {
                max_im = max_im.max(v.im.abs());
                v.re
            })
            .collect();
        (data, max_im)
    }
}
