//! Closed-form frequency-domain solver for the l2-l2 problem
//!
//! ```text
//!   min_x 1/2 ||y - S H x||^2 + tau ||A x - v||^2
//! ```
//!
//! Decimation folds the HR frequency grid onto the LR grid in alias classes
//! of `d = dr * dc` members: HR frequency `(p + a*ml, q + b*nl)` belongs to
//! LR class `(p, q)`. In that grouping the data-term Gram matrix
//! `F S_bar F^H` couples only frequencies within one class (each class block
//! is the all-(1/d) matrix), so the normal equations split into independent
//! `d x d` Hermitian systems - one per LR frequency - each a rank-one
//! perturbation of a diagonal. With a uniform regularizer spectrum the
//! per-class solve collapses to a scalar division.

use crate::error::{FsrError, Result};
use crate::fft::{Complex64, Fft2};
use crate::operators::{
    diff_cols_adjoint, diff_rows_adjoint, upsample_zero, build_gradients, Decimator, GradientPair,
    SpectralBlur,
};
use crate::raster::Image;
use crate::wavelet::{idwt, HaarDwt, WaveletCoeffs};

/// Default small-constant regularization added to the gradient Gram spectrum
/// so its DC entry stays invertible.
pub const DEFAULT_GRADIENT_SIGMA: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Alias-class grouping of the blur spectrum
// ---------------------------------------------------------------------------

/// The blur's frequency response regrouped by alias class: `d` complex bands
/// per LR frequency, together with the HR frequency index each entry came
/// from. The index map is a bijection `[0, Nl) x [0, d) -> [0, Nh)`.
#[derive(Debug, Clone)]
pub struct AliasBands {
    n_classes: usize,
    d: usize,
    values: Vec<Complex64>,
    hr_index: Vec<usize>,
}

impl AliasBands {
    pub fn from_blur(blur: &SpectralBlur, dec: &Decimator) -> Result<Self> {
        if blur.dims() != (dec.mh(), dec.nh()) {
            return Err(FsrError::dimension(format!(
                "blur grid {}x{} does not match decimator HR {}x{}",
                blur.rows(),
                blur.cols(),
                dec.mh(),
                dec.nh()
            )));
        }
        let (ml, nl, dr, dc) = (dec.ml(), dec.nl(), dec.dr(), dec.dc());
        let nh_cols = dec.nh();
        let d = dec.d();
        let n_classes = ml * nl;
        let mut values = Vec::with_capacity(n_classes * d);
        let mut hr_index = Vec::with_capacity(n_classes * d);
        for p in 0..ml {
            for q in 0..nl {
                for a in 0..dr {
                    for b in 0..dc {
                        let idx = (p + a * ml) * nh_cols + (q + b * nl);
                        hr_index.push(idx);
                        values.push(blur.otf()[idx]);
                    }
                }
            }
        }
        Ok(AliasBands { n_classes, d, values, hr_index })
    }

    /// Number of LR frequencies (alias classes).
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Members per class (`d`).
    pub fn d(&self) -> usize {
        self.d
    }

    /// Blur response of member `k` of class `class`.
    pub fn value(&self, class: usize, k: usize) -> Complex64 {
        self.values[class * self.d + k]
    }

    /// HR frequency index of member `k` of class `class`.
    pub fn hr_index(&self, class: usize, k: usize) -> usize {
        self.hr_index[class * self.d + k]
    }

    pub fn hr_indices(&self) -> &[usize] {
        &self.hr_index
    }

    /// Swaps two members across classes. Breaks the bijection contract on
    /// purpose; used as a negative control by the verification suite.
    #[doc(hidden)]
    pub fn corrupt_for_test(&mut self) {
        if self.hr_index.len() > self.d {
            // Exchange a member of class 0 with one of class 1.
            self.hr_index.swap(0, self.d);
            self.values.swap(0, self.d);
        }
    }
}

// ---------------------------------------------------------------------------
// Regularizer spectrum
// ---------------------------------------------------------------------------

/// Per-frequency diagonal of the regularizer Gram operator `A^H A` in the
/// DFT basis; the closed form works with its inverse.
/// Strict positivity is enforced so the inverse exists everywhere.
#[derive(Debug, Clone)]
pub struct RegSpectrum {
    rows: usize,
    cols: usize,
    gram: Vec<f64>,
    /// Set when the spectrum is a constant, enabling the scalar per-class
    /// solve.
    uniform: Option<f64>,
}

impl RegSpectrum {
    fn validated(rows: usize, cols: usize, gram: Vec<f64>, uniform: Option<f64>) -> Result<Self> {
        if gram.len() != rows * cols {
            return Err(FsrError::dimension("regularizer spectrum length mismatch"));
        }
        if !gram.iter().all(|&g| g.is_finite() && g > 0.0) {
            return Err(FsrError::invalid(
                "regularizer spectrum must be strictly positive and finite",
            ));
        }
        Ok(RegSpectrum { rows, cols, gram, uniform })
    }

    /// `A = I` (and any orthonormal `A`): Gram spectrum identically one.
    pub fn identity(rows: usize, cols: usize) -> Self {
        RegSpectrum {
            rows,
            cols,
            gram: vec![1.0; rows * cols],
            uniform: Some(1.0),
        }
    }

    /// Gradient-pair regularizer: `|sigma_h|^2 + |sigma_v|^2 + sigma`.
    pub fn gradient(gp: &GradientPair, sigma: f64) -> Result<Self> {
        if sigma <= 0.0 || sigma.is_nan() {
            return Err(FsrError::invalid("gradient regularizer needs sigma > 0"));
        }
        let (rows, cols) = gp.dims();
        let gram = gp
            .sigma_h()
            .iter()
            .zip(gp.sigma_v())
            .map(|(h, v)| h.norm_sqr() + v.norm_sqr() + sigma)
            .collect();
        Self::validated(rows, cols, gram, None)
    }

    /// Gradient-pair spectrum floored only where it vanishes (the DC entry),
    /// leaving every other frequency exact. Used by the TV x-update whose
    /// Gram operator is singular at DC.
    pub fn gradient_dc_floor(gp: &GradientPair, sigma_dc: f64) -> Result<Self> {
        if sigma_dc <= 0.0 || sigma_dc.is_nan() {
            return Err(FsrError::invalid("DC floor must be positive"));
        }
        let (rows, cols) = gp.dims();
        let mut gram: Vec<f64> = gp
            .sigma_h()
            .iter()
            .zip(gp.sigma_v())
            .map(|(h, v)| h.norm_sqr() + v.norm_sqr())
            .collect();
        gram[0] = sigma_dc;
        Self::validated(rows, cols, gram, None)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Gram spectrum entry (`A^H A` at one frequency).
    pub fn gram(&self) -> &[f64] {
        &self.gram
    }

    /// Inverse Gram spectrum at one frequency (the weighting the closed
    /// form divides by).
    pub fn inv_gram(&self, idx: usize) -> f64 {
        1.0 / self.gram[idx]
    }

    pub fn uniform(&self) -> Option<f64> {
        self.uniform
    }
}

// ---------------------------------------------------------------------------
// Regularizers and the problem type
// ---------------------------------------------------------------------------

/// The quadratic regularizer `tau ||A x - v||^2` of the l2-l2 problem.
pub enum L2Regularizer {
    /// `A = I`, `v` a prior image.
    Identity { prior: Image },
    /// `A = [Dh; Dv]`, `v` a gradient field, plus `tau * sigma * ||x||^2`
    /// keeping the Gram spectrum invertible at DC.
    Gradient { prior_h: Image, prior_v: Image, sigma: f64 },
    /// `A = W^H` for an orthonormal transform, `v` prior coefficients.
    Transform { transform: HaarDwt, prior: WaveletCoeffs },
}

impl L2Regularizer {
    /// Builds the Gram spectrum of this regularizer's `A^H A`.
    pub fn spectrum(&self, rows: usize, cols: usize) -> Result<RegSpectrum> {
        match self {
            L2Regularizer::Identity { .. } => Ok(RegSpectrum::identity(rows, cols)),
            L2Regularizer::Gradient { sigma, .. } => {
                RegSpectrum::gradient(&build_gradients(rows, cols), *sigma)
            }
            L2Regularizer::Transform { transform, .. } => {
                verify_orthonormal(transform, rows, cols)?;
                Ok(RegSpectrum::identity(rows, cols))
            }
        }
    }

    /// `A^H v` in the spatial domain.
    fn pullback(&self, rows: usize, cols: usize) -> Result<Image> {
        match self {
            L2Regularizer::Identity { prior } => {
                if prior.dims() != (rows, cols) {
                    return Err(FsrError::dimension("prior image dims mismatch"));
                }
                Ok(prior.clone())
            }
            L2Regularizer::Gradient { prior_h, prior_v, .. } => {
                if prior_h.dims() != (rows, cols) || prior_v.dims() != (rows, cols) {
                    return Err(FsrError::dimension("gradient field dims mismatch"));
                }
                diff_rows_adjoint(prior_h).zip(&diff_cols_adjoint(prior_v), |a, b| a + b)
            }
            L2Regularizer::Transform { prior, .. } => {
                if prior.dims() != (rows, cols) {
                    return Err(FsrError::dimension("coefficient dims mismatch"));
                }
                idwt(prior)
            }
        }
    }
}

/// Cheap orthonormality probe: energy preservation on a deterministic
/// pseudo-random image.
fn verify_orthonormal(transform: &HaarDwt, rows: usize, cols: usize) -> Result<()> {
    let mut s = 0x5bd1e995u64;
    let probe = Image::from_fn(rows, cols, |_, _| {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 40) as f64 / 16777216.0) - 0.5
    });
    let coeffs = transform.analyze(&probe)?;
    let rel = (coeffs.norm() - probe.norm()).abs() / probe.norm();
    if rel > 1e-8 {
        return Err(FsrError::invalid(format!(
            "transform is not orthonormal (energy drift {rel:.2e})"
        )));
    }
    Ok(())
}

/// One l2-l2 instance.
pub struct L2Problem {
    pub y: Image,
    pub blur: SpectralBlur,
    pub dec: Decimator,
    pub reg: L2Regularizer,
    pub tau: f64,
}

impl L2Problem {
    fn validate(&self) -> Result<()> {
        if self.tau.is_nan() || self.tau <= 0.0 || !self.tau.is_finite() {
            return Err(FsrError::invalid("tau must be positive and finite"));
        }
        if self.y.dims() != (self.dec.ml(), self.dec.nl()) {
            return Err(FsrError::dimension(format!(
                "observation is {}x{}, decimator expects {}x{}",
                self.y.height(),
                self.y.width(),
                self.dec.ml(),
                self.dec.nl()
            )));
        }
        if self.blur.dims() != (self.dec.mh(), self.dec.nh()) {
            return Err(FsrError::dimension("blur grid does not match HR dims"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Small complex Cholesky (per-class d x d Hermitian solves)
// ---------------------------------------------------------------------------

/// In-place lower Cholesky factorization of a row-major Hermitian `d x d`
/// block. Returns an error when the block is not positive definite (cannot
/// happen for tau > 0; treated as an internal invariant violation).
fn cholesky_in_place(m: &mut [Complex64], d: usize) -> Result<()> {
    for j in 0..d {
        let mut diag = m[j * d + j].re;
        for k in 0..j {
            diag -= m[j * d + k].norm_sqr();
        }
        if diag <= 0.0 || diag.is_nan() {
            return Err(FsrError::numerical(
                "per-class system not positive definite (singular block)",
            ));
        }
        let l_jj = diag.sqrt();
        m[j * d + j] = Complex64::new(l_jj, 0.0);
        for i in (j + 1)..d {
            let mut s = m[i * d + j];
            for k in 0..j {
                s -= m[i * d + k] * m[j * d + k].conj();
            }
            m[i * d + j] = s / l_jj;
        }
    }
    Ok(())
}

/// Solves `L L^H x = b` given the factor from [`cholesky_in_place`].
fn cholesky_solve(l: &[Complex64], d: usize, b: &mut [Complex64]) {
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * d + k] * b[k];
        }
        b[i] = s / l[i * d + i].re;
    }
    for i in (0..d).rev() {
        let mut s = b[i];
        for k in (i + 1)..d {
            s -= l[k * d + i].conj() * b[k];
        }
        b[i] = s / l[i * d + i].re;
    }
}

// ---------------------------------------------------------------------------
// Solve plan
// ---------------------------------------------------------------------------

enum ClassSolver {
    /// Uniform Gram spectrum `g0`: scalar Sherman-Morrison per class.
    Scalar { inv_gram: f64, inv_denom: Vec<f64> },
    /// General spectrum: pre-factored Hermitian `d x d` systems.
    Factored { chol: Vec<Complex64> },
}

/// Precomputed state for repeated solves against the same
/// (blur, decimator, regularizer spectrum, weight) quadruple; ADMM reuses
/// one plan across all its iterations.
pub struct SolvePlan {
    dec: Decimator,
    fft: Fft2,
    bands: AliasBands,
    two_tau: f64,
    solver: ClassSolver,
}

impl SolvePlan {
    pub fn new(
        blur: &SpectralBlur,
        dec: &Decimator,
        reg_spectrum: &RegSpectrum,
        two_tau: f64,
    ) -> Result<Self> {
        if two_tau.is_nan() || two_tau <= 0.0 || !two_tau.is_finite() {
            return Err(FsrError::invalid("solve weight (2*tau or mu) must be positive"));
        }
        if reg_spectrum.dims() != (dec.mh(), dec.nh()) {
            return Err(FsrError::dimension("regularizer spectrum does not match HR dims"));
        }
        let bands = AliasBands::from_blur(blur, dec)?;
        let d = bands.d();
        let n = bands.n_classes();
        let df = d as f64;

        let solver = if let Some(g0) = reg_spectrum.uniform() {
            let inv_gram = 1.0 / g0;
            let inv_denom = (0..n)
                .map(|class| {
                    let sum: f64 = (0..d)
                        .map(|k| bands.value(class, k).norm_sqr() * inv_gram)
                        .sum();
                    1.0 / (two_tau * df + sum)
                })
                .collect();
            ClassSolver::Scalar { inv_gram, inv_denom }
        } else {
            let mut chol = vec![Complex64::new(0.0, 0.0); n * d * d];
            let mut block = vec![Complex64::new(0.0, 0.0); d * d];
            for class in 0..n {
                for i in 0..d {
                    let ci = bands.value(class, i).conj();
                    for j in 0..d {
                        block[i * d + j] = ci * bands.value(class, j) / df;
                    }
                    block[i * d + i] += two_tau * reg_spectrum.gram()[bands.hr_index(class, i)];
                }
                cholesky_in_place(&mut block, d)?;
                chol[class * d * d..(class + 1) * d * d].copy_from_slice(&block);
            }
            ClassSolver::Factored { chol }
        };

        Ok(SolvePlan {
            dec: *dec,
            fft: Fft2::new(dec.mh(), dec.nh()),
            bands,
            two_tau,
            solver,
        })
    }

    pub fn two_tau(&self) -> f64 {
        self.two_tau
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    pub fn dec(&self) -> &Decimator {
        &self.dec
    }

    /// Maps the spectrum of `r` to the solution spectrum, in place.
    pub fn apply_spectrum(&self, rf: &mut [Complex64]) {
        let d = self.bands.d();
        let n = self.bands.n_classes();
        match &self.solver {
            ClassSolver::Scalar { inv_gram, inv_denom } => {
                let two_tau_inv = 1.0 / self.two_tau;
                for class in 0..n {
                    let mut t = Complex64::new(0.0, 0.0);
                    for k in 0..d {
                        t += self.bands.value(class, k) * rf[self.bands.hr_index(class, k)];
                    }
                    let w = t * (inv_gram * inv_denom[class]);
                    for k in 0..d {
                        let idx = self.bands.hr_index(class, k);
                        rf[idx] = (rf[idx] - self.bands.value(class, k).conj() * w)
                            * (inv_gram * two_tau_inv);
                    }
                }
            }
            ClassSolver::Factored { chol } => {
                let mut buf = vec![Complex64::new(0.0, 0.0); d];
                for class in 0..n {
                    for k in 0..d {
                        buf[k] = rf[self.bands.hr_index(class, k)];
                    }
                    cholesky_solve(&chol[class * d * d..(class + 1) * d * d], d, &mut buf);
                    for k in 0..d {
                        rf[self.bands.hr_index(class, k)] = buf[k];
                    }
                }
            }
        }
    }

    /// Full pipeline from the spectrum of `r` to the spatial solution, plus
    /// the solution spectrum for callers that keep working in the frequency
    /// domain. The output is real by construction; the imaginary residue is
    /// asserted below `1e-9 * ||x||` and discarded.
    pub fn solve_from_spectrum(&self, mut rf: Vec<Complex64>) -> Result<(Image, Vec<Complex64>)> {
        self.apply_spectrum(&mut rf);
        let (data, max_im) = self.fft.inverse_to_real(rf.clone());
        let norm = data.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(
            max_im <= 1e-9 * norm.max(1e-30) + 1e-30,
            "solution imaginary residue {max_im:e} exceeds 1e-9 * ||x|| = {:e}",
            1e-9 * norm
        );
        Ok((Image::new(self.dec.mh(), self.dec.nh(), data, 1.0)?, rf))
    }
}

/// Spectrum of the data-term component `H^H S^H y` of `r`.
pub fn data_term_spectrum(
    blur: &SpectralBlur,
    dec: &Decimator,
    fft: &Fft2,
    y: &Image,
) -> Result<Vec<Complex64>> {
    let up = upsample_zero(dec, y)?;
    let mut spec = fft.forward_real(up.data());
    for (s, g) in spec.iter_mut().zip(blur.otf()) {
        *s *= g.conj();
    }
    Ok(spec)
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Solves the l2-l2 problem by the closed-form frequency-domain expression.
/// The result exactly minimizes the quadratic: its normal-equation residual
/// stays below `1e-8 * ||r||`.
pub fn solve_l2(problem: &L2Problem) -> Result<Image> {
    problem.validate()?;
    let (mh, nh) = (problem.dec.mh(), problem.dec.nh());
    let reg_spectrum = problem.reg.spectrum(mh, nh)?;
    let two_tau = 2.0 * problem.tau;
    let plan = SolvePlan::new(&problem.blur, &problem.dec, &reg_spectrum, two_tau)?;

    let mut rf = data_term_spectrum(&problem.blur, &problem.dec, plan.fft(), &problem.y)?;
    let pullback = problem.reg.pullback(mh, nh)?;
    let reg_spec = plan.fft().forward_real(pullback.data());
    for (r, p) in rf.iter_mut().zip(reg_spec) {
        *r += p * two_tau;
    }

    let (x, _) = plan.solve_from_spectrum(rf)?;
    Ok(x.with_value_scale(problem.y.value_scale()))
}

/// Image-domain l2 solve (`A = I`, `v = xbar`): the uniform-spectrum
/// specialization whose inner solve is a scalar division per LR frequency.
pub fn solve_l2_image(
    y: &Image,
    blur: &SpectralBlur,
    dec: &Decimator,
    xbar: &Image,
    tau: f64,
) -> Result<Image> {
    solve_l2(&L2Problem {
        y: y.clone(),
        blur: blur.clone(),
        dec: *dec,
        reg: L2Regularizer::Identity { prior: xbar.clone() },
        tau,
    })
}

/// Gradient-domain l2 solve against a supplied gradient field, with the
/// `tau * sigma * ||x||^2` augmentation that keeps the Gram spectrum
/// invertible.
pub fn solve_l2_gradient(
    y: &Image,
    blur: &SpectralBlur,
    dec: &Decimator,
    grad_field: (&Image, &Image),
    tau: f64,
    sigma: f64,
) -> Result<Image> {
    solve_l2(&L2Problem {
        y: y.clone(),
        blur: blur.clone(),
        dec: *dec,
        reg: L2Regularizer::Gradient {
            prior_h: grad_field.0.clone(),
            prior_v: grad_field.1.clone(),
            sigma,
        },
        tau,
    })
}

/// Projects an externally produced HR estimate `x0` onto the solution space
/// of the observation model: identical quadratic to [`solve_l2_image`] with
/// `xbar = x0`.
pub fn back_project(
    y: &Image,
    blur: &SpectralBlur,
    dec: &Decimator,
    x0: &Image,
    tau: f64,
) -> Result<Image> {
    solve_l2_image(y, blur, dec, x0, tau)
}

// ---------------------------------------------------------------------------
// Normal-equation machinery shared by tests, CG and the verification suite
// ---------------------------------------------------------------------------

/// The `A^H A` action of a regularizer kind (without the prior data).
pub enum NormalReg {
    Identity,
    Gradient { sigma: f64 },
}

/// Applies the normal operator `H^H S_bar H x + two_tau * A^H A x`.
pub fn apply_normal(
    blur: &SpectralBlur,
    dec: &Decimator,
    reg: &NormalReg,
    two_tau: f64,
    x: &Image,
) -> Result<Image> {
    let hx = crate::operators::apply_blur(blur, x, false)?;
    let masked = crate::operators::mask_sbar(dec, &hx)?;
    let data_term = crate::operators::apply_blur(blur, &masked, true)?;
    let reg_term = match reg {
        NormalReg::Identity => x.clone(),
        NormalReg::Gradient { sigma } => {
            let dh = crate::operators::diff_rows(x);
            let dv = crate::operators::diff_cols(x);
            let dtd = diff_rows_adjoint(&dh).zip(&diff_cols_adjoint(&dv), |a, b| a + b)?;
            dtd.zip(x, |a, b| a + sigma * b)?
        }
    };
    data_term.zip(&reg_term, |a, b| a + two_tau * b)
}

/// Spatial-domain right-hand side `r = H^H S^H y + two_tau * A^H v`.
pub fn normal_rhs(problem: &L2Problem) -> Result<Image> {
    let up = upsample_zero(&problem.dec, &problem.y)?;
    let hty = crate::operators::apply_blur(&problem.blur, &up, true)?;
    let pullback = problem.reg.pullback(problem.dec.mh(), problem.dec.nh())?;
    hty.zip(&pullback, |a, b| a + 2.0 * problem.tau * b)
}

/// Relative normal-equation residual `||N x - r|| / ||r||` of a candidate
/// solution; the optimality yardstick used throughout the tests.
pub fn normal_residual(problem: &L2Problem, x: &Image) -> Result<f64> {
    let reg = match &problem.reg {
        L2Regularizer::Identity { .. } | L2Regularizer::Transform { .. } => NormalReg::Identity,
        L2Regularizer::Gradient { sigma, .. } => NormalReg::Gradient { sigma: *sigma },
    };
    let nx = apply_normal(&problem.blur, &problem.dec, &reg, 2.0 * problem.tau, x)?;
    let r = normal_rhs(problem)?;
    let diff = nx.zip(&r, |a, b| a - b)?;
    Ok(diff.norm() / r.norm().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{psf_to_otf, Kernel};

    fn lcg_image(h: usize, w: usize, seed: u64) -> Image {
        let mut s = seed;
        Image::from_fn(h, w, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 40) as f64 / 16777216.0
        })
    }

    #[test]
    fn plans_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<SolvePlan>();
        assert_send_sync::<AliasBands>();
        assert_send_sync::<RegSpectrum>();
    }

    #[test]
    fn alias_map_is_bijection() {
        for (mh, nh, dr, dc) in [(8, 8, 2, 2), (6, 9, 2, 3), (8, 8, 1, 1), (12, 8, 4, 2)] {
            let dec = Decimator::from_hr(mh, nh, dr, dc).unwrap();
            let blur = SpectralBlur::identity(mh, nh);
            let bands = AliasBands::from_blur(&blur, &dec).unwrap();
            let mut seen = vec![false; mh * nh];
            for &idx in bands.hr_indices() {
                assert!(!seen[idx], "hr index {idx} repeated");
                seen[idx] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn single_class_when_d_is_one() {
        let dec = Decimator::from_hr(4, 4, 1, 1).unwrap();
        let k = Kernel::gaussian(3, 3, 1.0).unwrap();
        let blur = psf_to_otf(&k, 4, 4).unwrap();
        let bands = AliasBands::from_blur(&blur, &dec).unwrap();
        assert_eq!(bands.d(), 1);
        for class in 0..16 {
            assert_eq!(bands.hr_index(class, 0), class);
            assert_eq!(bands.value(class, 0), blur.otf()[class]);
        }
    }

    #[test]
    fn identity_spectrum_is_all_ones() {
        let spectrum = RegSpectrum::identity(4, 6);
        assert!(spectrum.gram().iter().all(|&g| g == 1.0));
        assert_eq!(spectrum.uniform(), Some(1.0));
    }

    #[test]
    fn gradient_spectrum_dc_is_sigma() {
        let gp = build_gradients(8, 8);
        let spectrum = RegSpectrum::gradient(&gp, 1e-8).unwrap();
        // Only sigma survives at DC, so the inverse Gram there is 1e8.
        assert!((spectrum.inv_gram(0) - 1e8).abs() < 1.0);
        assert!(RegSpectrum::gradient(&gp, 0.0).is_err());
    }

    #[test]
    fn gradient_spectrum_matches_dense_inverse() {
        // The inverse Gram spectrum must equal
        // diag(F (Dh^T Dh + Dv^T Dv + sigma I)^-1 F^H).
        use crate::operators::{dense_gradient_matrix, GradientAxis};
        use nalgebra::DMatrix;
        let (m, n) = (4, 4);
        let sigma = 0.37;
        let gp = build_gradients(m, n);
        let spectrum = RegSpectrum::gradient(&gp, sigma).unwrap();
        let dh = dense_gradient_matrix(m, n, GradientAxis::Rows);
        let dv = dense_gradient_matrix(m, n, GradientAxis::Cols);
        let gram = dh.transpose() * &dh + dv.transpose() * &dv + DMatrix::identity(16, 16) * sigma;
        let inv = gram.try_inverse().unwrap();
        // Dense unitary DFT matrix.
        let nn = 16usize;
        let mut f = DMatrix::from_element(nn, nn, Complex64::new(0.0, 0.0));
        for p in 0..m {
            for q in 0..n {
                for i in 0..m {
                    for j in 0..n {
                        let ang = -2.0 * std::f64::consts::PI
                            * (p as f64 * i as f64 / m as f64 + q as f64 * j as f64 / n as f64);
                        f[(p * n + q, i * n + j)] =
                            Complex64::new(ang.cos(), ang.sin()) / (nn as f64).sqrt();
                    }
                }
            }
        }
        let inv_c = inv.map(|v| Complex64::new(v, 0.0));
        let sandwich = &f * inv_c * f.adjoint();
        for idx in 0..nn {
            let expect = sandwich[(idx, idx)];
            assert!(expect.im.abs() < 1e-10);
            assert!(
                (spectrum.inv_gram(idx) - expect.re).abs() <= 1e-8 * expect.re.abs(),
                "inverse Gram mismatch at {idx}: {} vs {}",
                spectrum.inv_gram(idx),
                expect.re
            );
        }
    }

    #[test]
    fn scalar_normal_equation_case() {
        // No blur, d = 1, A = I: per-pixel x = (y + 2 tau xbar) / (1 + 2 tau).
        let y = lcg_image(5, 4, 1);
        let xbar = lcg_image(5, 4, 2);
        let dec = Decimator::from_hr(5, 4, 1, 1).unwrap();
        let blur = SpectralBlur::identity(5, 4);
        let tau = 0.7;
        let x = solve_l2_image(&y, &blur, &dec, &xbar, tau).unwrap();
        for i in 0..y.len() {
            let expect = (y.data()[i] + 2.0 * tau * xbar.data()[i]) / (1.0 + 2.0 * tau);
            assert!((x.data()[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_reproduces_dense_solve() {
        use nalgebra::{DMatrix, DVector};
        let d = 5;
        let mut s = 77u64;
        let mut rnd = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 40) as f64 / 16777216.0) - 0.5
        };
        // Hermitian PD block: c c^H / d + diag(positives).
        let c: Vec<Complex64> = (0..d).map(|_| Complex64::new(rnd(), rnd())).collect();
        let mut block = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                block[i * d + j] = c[i].conj() * c[j] / d as f64;
            }
            block[i * d + i] += 0.5 + rnd().abs();
        }
        let dense = DMatrix::from_fn(d, d, |i, j| block[i * d + j]);
        let b: Vec<Complex64> = (0..d).map(|_| Complex64::new(rnd(), rnd())).collect();
        let mut x = b.clone();
        cholesky_in_place(&mut block, d).unwrap();
        cholesky_solve(&block, d, &mut x);
        let bx = dense * DVector::from_row_slice(&x);
        for i in 0..d {
            assert!((bx[i] - b[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn normal_residual_small_for_all_regularizers() {
        let k = Kernel::gaussian(3, 3, 1.2).unwrap();
        let dec = Decimator::from_hr(16, 16, 2, 2).unwrap();
        let blur = psf_to_otf(&k, 16, 16).unwrap();
        let y = lcg_image(8, 8, 3);

        let problems = vec![
            L2Problem {
                y: y.clone(),
                blur: blur.clone(),
                dec,
                reg: L2Regularizer::Identity { prior: lcg_image(16, 16, 4) },
                tau: 0.05,
            },
            L2Problem {
                y: y.clone(),
                blur: blur.clone(),
                dec,
                reg: L2Regularizer::Gradient {
                    prior_h: lcg_image(16, 16, 5),
                    prior_v: lcg_image(16, 16, 6),
                    sigma: 1e-8,
                },
                tau: 0.05,
            },
            L2Problem {
                y: y.clone(),
                blur: blur.clone(),
                dec,
                reg: L2Regularizer::Transform {
                    transform: HaarDwt::new(2).unwrap(),
                    prior: crate::wavelet::WaveletCoeffs::new(
                        16,
                        16,
                        2,
                        lcg_image(16, 16, 7).data().to_vec(),
                    )
                    .unwrap(),
                },
                tau: 0.05,
            },
        ];
        for p in &problems {
            let x = solve_l2(p).unwrap();
            let res = normal_residual(p, &x).unwrap();
            assert!(res <= 1e-8, "normal residual {res:e}");
        }
    }

    #[test]
    fn gradient_solution_via_transform_reg_rejects_bad_sigma() {
        let dec = Decimator::from_hr(8, 8, 2, 2).unwrap();
        let blur = SpectralBlur::identity(8, 8);
        let y = lcg_image(4, 4, 9);
        let vh = lcg_image(8, 8, 10);
        let vv = lcg_image(8, 8, 11);
        assert!(solve_l2_gradient(&y, &blur, &dec, (&vh, &vv), 0.1, 0.0).is_err());
    }

    #[test]
    fn back_project_dominated_by_prior_at_huge_tau() {
        let k = Kernel::gaussian(3, 3, 1.0).unwrap();
        let dec = Decimator::from_hr(12, 12, 2, 2).unwrap();
        let blur = psf_to_otf(&k, 12, 12).unwrap();
        let x0 = lcg_image(12, 12, 21);
        let hx = crate::operators::apply_blur(&blur, &x0, false).unwrap();
        let y = crate::operators::decimate(&dec, &hx).unwrap();
        let x = back_project(&y, &blur, &dec, &x0, 1e6).unwrap();
        let diff = x.zip(&x0, |a, b| a - b).unwrap();
        assert!(diff.norm() / x0.norm() <= 1e-3);
    }

    #[test]
    fn mismatched_observation_dims_rejected() {
        let dec = Decimator::from_hr(8, 8, 2, 2).unwrap();
        let blur = SpectralBlur::identity(8, 8);
        let y = lcg_image(8, 8, 9); // should be 4x4
        let xbar = lcg_image(8, 8, 10);
        assert!(solve_l2_image(&y, &blur, &dec, &xbar, 0.1).is_err());
    }
}
