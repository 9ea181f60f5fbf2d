//! Reference solvers: dense direct solution of the normal equations,
//! conjugate gradient on the same system, and Keys bicubic interpolation.
//!
//! The dense route is assembled from explicit matrices built straight off
//! each operator's spatial definition, so it stays independent of the
//! spectral solver it verifies.

use nalgebra::{DMatrix, DVector};

use crate::error::{FsrError, Result};
use crate::operators::{
    dense_blur_matrix, dense_decimation_matrix, dense_gradient_matrix, Decimator, GradientAxis,
    Kernel,
};
use crate::raster::Image;
use crate::wavelet::dwt;

/// Hard cap on dense instances; above this the direct factorization stops
/// being a practical oracle.
pub const DENSE_MAX_UNKNOWNS: usize = 4096;

/// Which regularizer the dense mirror should materialize.
pub enum DenseReg {
    /// `A = I`, prior image `v`.
    Identity { v: Vec<f64> },
    /// `A = [Dh; Dv]` stacked, prior field `v = [vh; vv]`, plus
    /// `tau * sigma ||x||^2`.
    Gradient { vh: Vec<f64>, vv: Vec<f64>, sigma: f64 },
    /// Orthonormal wavelet analysis `A = W^H` at the given depth.
    Wavelet { v: Vec<f64>, levels: usize },
}

/// One fully materialized l2-l2 instance.
pub struct DenseProblem {
    pub h: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
    pub v: DVector<f64>,
    /// Extra Tikhonov weight from the sigma-augmented gradient model.
    pub sigma: f64,
}

impl DenseProblem {
    pub fn build(y: &Image, kernel: &Kernel, dec: &Decimator, reg: DenseReg) -> Result<Self> {
        let (mh, nh) = (dec.mh(), dec.nh());
        let n = mh * nh;
        if n > DENSE_MAX_UNKNOWNS {
            return Err(FsrError::invalid(format!(
                "dense oracle limited to {DENSE_MAX_UNKNOWNS} unknowns, got {n}"
            )));
        }
        if y.dims() != (dec.ml(), dec.nl()) {
            return Err(FsrError::dimension("observation dims mismatch"));
        }
        let h = dense_blur_matrix(kernel, mh, nh);
        let s = dense_decimation_matrix(dec);
        let (a, v, sigma) = match reg {
            DenseReg::Identity { v } => {
                if v.len() != n {
                    return Err(FsrError::dimension("prior length mismatch"));
                }
                (DMatrix::identity(n, n), DVector::from_vec(v), 0.0)
            }
            DenseReg::Gradient { vh, vv, sigma } => {
                if vh.len() != n || vv.len() != n {
                    return Err(FsrError::dimension("gradient field length mismatch"));
                }
                let dh = dense_gradient_matrix(mh, nh, GradientAxis::Rows);
                let dv = dense_gradient_matrix(mh, nh, GradientAxis::Cols);
                let mut a = DMatrix::zeros(2 * n, n);
                a.view_mut((0, 0), (n, n)).copy_from(&dh);
                a.view_mut((n, 0), (n, n)).copy_from(&dv);
                let mut v2 = Vec::with_capacity(2 * n);
                v2.extend_from_slice(&vh);
                v2.extend_from_slice(&vv);
                (a, DVector::from_vec(v2), sigma)
            }
            DenseReg::Wavelet { v, levels } => {
                if v.len() != n {
                    return Err(FsrError::dimension("coefficient length mismatch"));
                }
                // Analysis matrix from basis vectors; the wavelet module is
                // itself verified against a hand-built dense Haar matrix.
                let mut a = DMatrix::zeros(n, n);
                for col in 0..n {
                    let mut e = vec![0.0; n];
                    e[col] = 1.0;
                    let img = Image::new(mh, nh, e, 1.0)?;
                    let coeffs = dwt(&img, levels)?;
                    for row in 0..n {
                        a[(row, col)] = coeffs.data()[row];
                    }
                }
                (a, DVector::from_vec(v), 0.0)
            }
        };
        Ok(DenseProblem {
            h,
            s,
            a,
            y: DVector::from_row_slice(y.data()),
            v,
            sigma,
        })
    }

    /// Normal matrix `H^T S_bar H + 2 tau (A^T A + sigma I)`.
    pub fn normal_matrix(&self, tau: f64) -> DMatrix<f64> {
        let sh = &self.s * &self.h;
        let n = self.h.ncols();
        let mut m = sh.transpose() * &sh + (self.a.transpose() * &self.a) * (2.0 * tau);
        if self.sigma != 0.0 {
            let w = 2.0 * tau * self.sigma;
            for i in 0..n {
                m[(i, i)] += w;
            }
        }
        m
    }

    /// Right-hand side `H^T S^T y + 2 tau A^T v`.
    pub fn rhs(&self, tau: f64) -> DVector<f64> {
        self.h.transpose() * (self.s.transpose() * &self.y)
            + self.a.transpose() * &self.v * (2.0 * tau)
    }
}

/// Direct factorization solve of the dense normal equations.
pub fn dense_solve(p: &DenseProblem, tau: f64) -> Result<DVector<f64>> {
    let m = p.normal_matrix(tau);
    let rhs = p.rhs(tau);
    match nalgebra::Cholesky::new(m) {
        Some(chol) => Ok(chol.solve(&rhs)),
        None => Err(FsrError::numerical(
            "dense normal matrix is singular (tau = 0 with rank-deficient data term?)",
        )),
    }
}

/// Conjugate gradient on a symmetric positive definite operator, run to the
/// requested relative residual.
pub struct CgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub rel_residual: f64,
}

pub fn cg_solve(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<CgResult> {
    let n = b.len();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Ok(CgResult { x: vec![0.0; n], iterations: 0, rel_residual: 0.0 });
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    for iter in 1..=max_iters {
        let ap = apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(FsrError::numerical("cg operator is not positive definite"));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let rel = rr_new.sqrt() / b_norm;
        if rel <= tol {
            return Ok(CgResult { x, iterations: iter, rel_residual: rel });
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(FsrError::numerical(format!(
        "cg did not reach tol {tol:e} within {max_iters} iterations (residual {:e})",
        rr.sqrt() / b_norm
    )))
}

// ---------------------------------------------------------------------------
// Bicubic interpolation (Keys, a = -0.5)
// ---------------------------------------------------------------------------

fn keys_weight(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        (A + 2.0) * t * t * t - (A + 3.0) * t * t + 1.0
    } else if t < 2.0 {
        A * t * t * t - 5.0 * A * t * t + 8.0 * A * t - 4.0 * A
    } else {
        0.0
    }
}

/// Separable 1-D bicubic pass along one axis, edge-clamped. `factor` is the
/// integer upsampling factor; output sample `I` reads source coordinate
/// `I / factor`, which keeps the source samples on the decimation grid
/// (output `I = factor * i` reproduces source `i` exactly).
fn upsample_axis(src: &[f64], len: usize, stride: usize, count: usize, factor: usize, out: &mut [f64], out_stride: usize) {
    let out_len = len * factor;
    for lane in 0..count {
        for oi in 0..out_len {
            let s = oi as f64 / factor as f64;
            let i0 = s.floor() as isize;
            let frac = s - i0 as f64;
            let mut acc = 0.0;
            for k in -1..=2isize {
                let w = keys_weight(frac - k as f64);
                if w != 0.0 {
                    let idx = (i0 + k).clamp(0, len as isize - 1) as usize;
                    acc += w * src[idx * stride + lane];
                }
            }
            out[oi * out_stride + lane] = acc;
        }
    }
}

/// Keys bicubic upsampling by integer factors with edge clamping. The
/// sample phase matches the decimator: LR sample `(i, j)` sits at HR
/// position `(i * dr, j * dc)`.
pub fn bicubic_upsample(y: &Image, dr: usize, dc: usize) -> Image {
    if dr == 1 && dc == 1 {
        return y.clone();
    }
    let (ml, nl) = y.dims();
    let (mh, nh) = (ml * dr, nl * dc);
    // Rows direction first: (ml x nl) -> (mh x nl).
    let mut mid = vec![0.0; mh * nl];
    upsample_axis(y.data(), ml, nl, nl, dr, &mut mid, nl);
    // Columns: (mh x nl) -> (mh x nh). Process each row as a lane-1 pass.
    let mut out = vec![0.0; mh * nh];
    for r in 0..mh {
        upsample_axis(&mid[r * nl..(r + 1) * nl], nl, 1, 1, dc, &mut out[r * nh..(r + 1) * nh], 1);
    }
    Image::new(mh, nh, out, y.value_scale()).expect("bicubic output shape")
}
