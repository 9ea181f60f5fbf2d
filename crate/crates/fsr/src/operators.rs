//! Structured linear operators of the observation model: cyclic blur
//! `H`/`H^H`, decimation `S`/`S^H`/`S_bar`, and the periodic forward-difference
//! pair `Dh`/`Dv`. Everything is applied in the frequency domain; each
//! operator also has a dense mirror built directly from its spatial
//! definition so downstream solvers can request an independent oracle.

use nalgebra::DMatrix;

use crate::error::{FsrError, Result};
use crate::fft::{Complex64, Fft2};
use crate::raster::Image;

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// A small real convolution kernel (PSF).
#[derive(Debug, Clone)]
pub struct Kernel {
    rows: usize,
    cols: usize,
    taps: Vec<f64>,
}

impl Kernel {
    pub fn new(rows: usize, cols: usize, taps: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || taps.len() != rows * cols {
            return Err(FsrError::invalid("kernel shape/taps mismatch"));
        }
        if !taps.iter().all(|v| v.is_finite()) {
            return Err(FsrError::invalid("kernel contains non-finite taps"));
        }
        Ok(Kernel { rows, cols, taps })
    }

    /// Identity kernel.
    pub fn delta() -> Self {
        Kernel { rows: 1, cols: 1, taps: vec![1.0] }
    }

    /// Normalized 2-D Gaussian of the given variance.
    pub fn gaussian(rows: usize, cols: usize, variance: f64) -> Result<Self> {
        if variance <= 0.0 {
            return Err(FsrError::invalid("gaussian variance must be positive"));
        }
        let (cr, cc) = (center(rows), center(cols));
        let mut taps = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let du = i as f64 - cr as f64;
                let dv = j as f64 - cc as f64;
                taps.push((-(du * du + dv * dv) / (2.0 * variance)).exp());
            }
        }
        let sum: f64 = taps.iter().sum();
        for t in &mut taps {
            *t /= sum;
        }
        Kernel::new(rows, cols, taps)
    }

    /// Parses a kernel specification: either the built-in
    /// `gaussian:RxC:VAR` form (e.g. `gaussian:9x9:3`) or a path to a
    /// kernel file (first line `rows cols`, then row-major reals).
    pub fn from_spec(spec: &str) -> Result<Self> {
        if let Some(rest) = spec.strip_prefix("gaussian:") {
            let mut parts = rest.split(':');
            let shape = parts.next().unwrap_or_default();
            let var = parts
                .next()
                .ok_or_else(|| FsrError::invalid(format!("bad kernel spec '{spec}'")))?;
            let (r, c) = shape
                .split_once('x')
                .ok_or_else(|| FsrError::invalid(format!("bad kernel shape in '{spec}'")))?;
            let rows: usize = r.parse().map_err(|_| FsrError::invalid("bad kernel rows"))?;
            let cols: usize = c.parse().map_err(|_| FsrError::invalid("bad kernel cols"))?;
            let variance: f64 = var.parse().map_err(|_| FsrError::invalid("bad kernel variance"))?;
            Kernel::gaussian(rows, cols, variance)
        } else {
            Kernel::from_file(spec)
        }
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let mut nums = text.split_whitespace();
        let rows: usize = nums
            .next()
            .ok_or_else(|| FsrError::format("empty kernel file"))?
            .parse()
            .map_err(|_| FsrError::format("bad kernel rows"))?;
        let cols: usize = nums
            .next()
            .ok_or_else(|| FsrError::format("kernel file missing cols"))?
            .parse()
            .map_err(|_| FsrError::format("bad kernel cols"))?;
        let taps: Vec<f64> = nums
            .map(|t| t.parse::<f64>().map_err(|_| FsrError::format(format!("bad kernel tap '{t}'"))))
            .collect::<Result<_>>()?;
        if taps.len() != rows * cols {
            return Err(FsrError::format(format!(
                "kernel file declares {rows}x{cols} but has {} taps",
                taps.len()
            )));
        }
        Kernel::new(rows, cols, taps)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }
}

/// Center tap index: odd sizes center exactly, even sizes take
/// `size / 2`.
fn center(size: usize) -> usize {
    if size % 2 == 1 {
        (size - 1) / 2
    } else {
        size / 2
    }
}

// ---------------------------------------------------------------------------
// SpectralBlur (H = F^H diag(otf) F)
// ---------------------------------------------------------------------------

/// Frequency response of a cyclic convolution operator on an `rows x cols`
/// grid.
#[derive(Debug, Clone)]
pub struct SpectralBlur {
    rows: usize,
    cols: usize,
    otf: Vec<Complex64>,
    psf_support: (usize, usize),
}

impl SpectralBlur {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn otf(&self) -> &[Complex64] {
        &self.otf
    }

    pub fn psf_support(&self) -> (usize, usize) {
        self.psf_support
    }

    /// The all-pass (identity) operator.
    pub fn identity(rows: usize, cols: usize) -> Self {
        SpectralBlur {
            rows,
            cols,
            otf: vec![Complex64::new(1.0, 0.0); rows * cols],
            psf_support: (1, 1),
        }
    }
}

/// Embeds the kernel into an `rows x cols` canvas, circularly shifted so the
/// center tap lands on index (0,0), and takes its DFT. `H x` then equals the
/// cyclic convolution of `x` with the kernel centered on its center tap.
pub fn psf_to_otf(psf: &Kernel, rows: usize, cols: usize) -> Result<SpectralBlur> {
    if psf.rows() > rows || psf.cols() > cols {
        return Err(FsrError::dimension(format!(
            "psf {}x{} larger than target {}x{}",
            psf.rows(),
            psf.cols(),
            rows,
            cols
        )));
    }
    let (cr, cc) = (center(psf.rows()), center(psf.cols()));
    let mut canvas = vec![0.0f64; rows * cols];
    for u in 0..psf.rows() {
        for v in 0..psf.cols() {
            let a = (u + rows - cr) % rows;
            let b = (v + cols - cc) % cols;
            canvas[a * cols + b] += psf.taps()[u * psf.cols() + v];
        }
    }
    let fft = Fft2::new(rows, cols);
    let otf = fft.forward_real(&canvas);
    Ok(SpectralBlur { rows, cols, otf, psf_support: (psf.rows(), psf.cols()) })
}

/// Applies `H` (or `H^H` with `adjoint`) to an image:
/// `ifft(otf .* fft(x))` with the conjugate response for the adjoint.
pub fn apply_blur(blur: &SpectralBlur, x: &Image, adjoint: bool) -> Result<Image> {
    if x.dims() != blur.dims() {
        return Err(FsrError::dimension(format!(
            "blur expects {}x{}, image is {}x{}",
            blur.rows,
            blur.cols,
            x.height(),
            x.width()
        )));
    }
    let fft = Fft2::new(blur.rows, blur.cols);
    let mut spec = fft.forward_real(x.data());
    for (s, g) in spec.iter_mut().zip(&blur.otf) {
        *s *= if adjoint { g.conj() } else { *g };
    }
    let (data, max_im) = fft.inverse_to_real(spec);
    let norm = x.norm().max(f64::MIN_POSITIVE);
    assert!(
        max_im <= 1e-10 * norm.max(1.0),
        "blur output imaginary residue {max_im:e} too large"
    );
    Image::new(blur.rows, blur.cols, data, x.value_scale())
}

// ---------------------------------------------------------------------------
// Decimation
// ---------------------------------------------------------------------------

/// Integer decimation: `S` keeps the (0,0) sample of each `dr x dc` cell,
/// `S^H` zero-fills, `S_bar = S^H S` masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decimator {
    dr: usize,
    dc: usize,
    ml: usize,
    nl: usize,
}

impl Decimator {
    /// From LR dimensions and factors.
    pub fn new(ml: usize, nl: usize, dr: usize, dc: usize) -> Result<Self> {
        if ml == 0 || nl == 0 || dr == 0 || dc == 0 {
            return Err(FsrError::invalid("decimator dims and factors must be >= 1"));
        }
        Ok(Decimator { dr, dc, ml, nl })
    }

    /// From HR dimensions and factors; errors when the factors do not divide
    /// the dimensions.
    pub fn from_hr(mh: usize, nh: usize, dr: usize, dc: usize) -> Result<Self> {
        if dr == 0 || dc == 0 {
            return Err(FsrError::invalid("decimation factors must be >= 1"));
        }
        if mh % dr != 0 || nh % dc != 0 {
            return Err(FsrError::dimension(format!(
                "HR dims {mh}x{nh} not divisible by factors {dr}x{dc}"
            )));
        }
        Decimator::new(mh / dr, nh / dc, dr, dc)
    }

    pub fn dr(&self) -> usize {
        self.dr
    }

    pub fn dc(&self) -> usize {
        self.dc
    }

    pub fn ml(&self) -> usize {
        self.ml
    }

    pub fn nl(&self) -> usize {
        self.nl
    }

    pub fn mh(&self) -> usize {
        self.ml * self.dr
    }

    pub fn nh(&self) -> usize {
        self.nl * self.dc
    }

    /// Aggregate factor `d = dr * dc`.
    pub fn d(&self) -> usize {
        self.dr * self.dc
    }

    pub fn n_lr(&self) -> usize {
        self.ml * self.nl
    }

    pub fn n_hr(&self) -> usize {
        self.mh() * self.nh()
    }

    fn expect_hr(&self, img: &Image) -> Result<()> {
        if img.dims() != (self.mh(), self.nh()) {
            return Err(FsrError::dimension(format!(
                "expected HR {}x{}, got {}x{}",
                self.mh(),
                self.nh(),
                img.height(),
                img.width()
            )));
        }
        Ok(())
    }

    fn expect_lr(&self, img: &Image) -> Result<()> {
        if img.dims() != (self.ml, self.nl) {
            return Err(FsrError::dimension(format!(
                "expected LR {}x{}, got {}x{}",
                self.ml,
                self.nl,
                img.height(),
                img.width()
            )));
        }
        Ok(())
    }
}

/// `S x`: keep the top-left sample of each cell.
pub fn decimate(dec: &Decimator, x: &Image) -> Result<Image> {
    dec.expect_hr(x)?;
    let mut out = Vec::with_capacity(dec.n_lr());
    for i in 0..dec.ml {
        for j in 0..dec.nl {
            out.push(x.at(i * dec.dr, j * dec.dc));
        }
    }
    Image::new(dec.ml, dec.nl, out, x.value_scale())
}

/// `S^H y`: zero interpolation.
pub fn upsample_zero(dec: &Decimator, y: &Image) -> Result<Image> {
    dec.expect_lr(y)?;
    let mut out = vec![0.0; dec.n_hr()];
    let nh = dec.nh();
    for i in 0..dec.ml {
        for j in 0..dec.nl {
            out[(i * dec.dr) * nh + j * dec.dc] = y.at(i, j);
        }
    }
    Image::new(dec.mh(), dec.nh(), out, y.value_scale())
}

/// `S_bar x = S^H S x`: zero out all but the sampled positions.
pub fn mask_sbar(dec: &Decimator, x: &Image) -> Result<Image> {
    dec.expect_hr(x)?;
    let mut out = vec![0.0; dec.n_hr()];
    let nh = dec.nh();
    for i in 0..dec.ml {
        for j in 0..dec.nl {
            let idx = (i * dec.dr) * nh + j * dec.dc;
            out[idx] = x.data()[idx];
        }
    }
    Image::new(dec.mh(), dec.nh(), out, x.value_scale())
}

// ---------------------------------------------------------------------------
// Periodic forward differences
// ---------------------------------------------------------------------------

/// Frequency responses of the periodic forward-difference operators.
///
/// `Dh` differences along rows (`x(i+1 mod m, j) - x(i, j)`), `Dv` along
/// columns. Both annihilate constants, so their responses vanish at DC.
#[derive(Debug, Clone)]
pub struct GradientPair {
    rows: usize,
    cols: usize,
    sigma_h: Vec<Complex64>,
    sigma_v: Vec<Complex64>,
}

pub fn build_gradients(rows: usize, cols: usize) -> GradientPair {
    let mut sigma_h = Vec::with_capacity(rows * cols);
    let mut sigma_v = Vec::with_capacity(rows * cols);
    let tau = 2.0 * std::f64::consts::PI;
    for p in 0..rows {
        let ah = tau * p as f64 / rows as f64;
        let sh = Complex64::new(ah.cos() - 1.0, ah.sin());
        for q in 0..cols {
            let av = tau * q as f64 / cols as f64;
            sigma_h.push(sh);
            sigma_v.push(Complex64::new(av.cos() - 1.0, av.sin()));
        }
    }
    GradientPair { rows, cols, sigma_h, sigma_v }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientAxis {
    /// Differences along rows (`i + 1`).
    Rows,
    /// Differences along columns (`j + 1`).
    Cols,
}

impl GradientPair {
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn sigma_h(&self) -> &[Complex64] {
        &self.sigma_h
    }

    pub fn sigma_v(&self) -> &[Complex64] {
        &self.sigma_v
    }

    /// Applies `Dh`/`Dv` (or the adjoint) spectrally.
    pub fn apply(&self, x: &Image, axis: GradientAxis, adjoint: bool) -> Result<Image> {
        if x.dims() != (self.rows, self.cols) {
            return Err(FsrError::dimension("gradient operator dims mismatch"));
        }
        let fft = Fft2::new(self.rows, self.cols);
        let mut spec = fft.forward_real(x.data());
        let sigma = match axis {
            GradientAxis::Rows => &self.sigma_h,
            GradientAxis::Cols => &self.sigma_v,
        };
        for (s, g) in spec.iter_mut().zip(sigma) {
            *s *= if adjoint { g.conj() } else { *g };
        }
        let (data, max_im) = fft.inverse_to_real(spec);
        assert!(max_im <= 1e-9 * x.norm().max(1.0));
        Image::new(self.rows, self.cols, data, x.value_scale())
    }
}

/// Spatial forward difference along rows (periodic); equals the spectral
/// `Dh` to roundoff and is used where the FFT would be wasteful.
pub fn diff_rows(x: &Image) -> Image {
    let (m, n) = x.dims();
    Image::from_fn(m, n, |i, j| x.at((i + 1) % m, j) - x.at(i, j)).with_value_scale(x.value_scale())
}

/// Spatial forward difference along columns (periodic).
pub fn diff_cols(x: &Image) -> Image {
    let (m, n) = x.dims();
    Image::from_fn(m, n, |i, j| x.at(i, (j + 1) % n) - x.at(i, j)).with_value_scale(x.value_scale())
}

/// Adjoint of [`diff_rows`]: `z(i-1, j) - z(i, j)` with wraparound.
pub fn diff_rows_adjoint(z: &Image) -> Image {
    let (m, n) = z.dims();
    Image::from_fn(m, n, |i, j| z.at((i + m - 1) % m, j) - z.at(i, j))
        .with_value_scale(z.value_scale())
}

/// Adjoint of [`diff_cols`].
pub fn diff_cols_adjoint(z: &Image) -> Image {
    let (m, n) = z.dims();
    Image::from_fn(m, n, |i, j| z.at(i, (j + n - 1) % n) - z.at(i, j))
        .with_value_scale(z.value_scale())
}

// ---------------------------------------------------------------------------
// Dense mirrors
// ---------------------------------------------------------------------------

/// Dense BCCB blur matrix built directly from the kernel taps (no FFT
/// involved), for small-instance verification.
pub fn dense_blur_matrix(psf: &Kernel, rows: usize, cols: usize) -> DMatrix<f64> {
    let n = rows * cols;
    let (cr, cc) = (center(psf.rows()), center(psf.cols()));
    let mut h = DMatrix::zeros(n, n);
    for src_i in 0..rows {
        for src_j in 0..cols {
            let col = src_i * cols + src_j;
            for u in 0..psf.rows() {
                for v in 0..psf.cols() {
                    let i = (src_i + u + rows - cr) % rows;
                    let j = (src_j + v + cols - cc) % cols;
                    h[(i * cols + j, col)] += psf.taps()[u * psf.cols() + v];
                }
            }
        }
    }
    h
}

/// Dense selection matrix for `S` (`Nl x Nh`).
pub fn dense_decimation_matrix(dec: &Decimator) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(dec.n_lr(), dec.n_hr());
    let nh = dec.nh();
    for i in 0..dec.ml() {
        for j in 0..dec.nl() {
            s[(i * dec.nl() + j, (i * dec.dr()) * nh + j * dec.dc())] = 1.0;
        }
    }
    s
}

/// Dense forward-difference matrix along the given axis.
pub fn dense_gradient_matrix(rows: usize, cols: usize, axis: GradientAxis) -> DMatrix<f64> {
    let n = rows * cols;
    let mut d = DMatrix::zeros(n, n);
    for i in 0..rows {
        for j in 0..cols {
            let r = i * cols + j;
            let shifted = match axis {
                GradientAxis::Rows => ((i + 1) % rows) * cols + j,
                GradientAxis::Cols => i * cols + (j + 1) % cols,
            };
            d[(r, shifted)] += 1.0;
            d[(r, r)] -= 1.0;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn lcg_image(h: usize, w: usize, seed: u64) -> Image {
        let mut s = seed;
        Image::from_fn(h, w, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 40) as f64 / 16777216.0) - 0.5
        })
    }

    fn dot(a: &Image, b: &Image) -> f64 {
        a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn delta_kernel_gives_allpass_otf() {
        let blur = psf_to_otf(&Kernel::delta(), 5, 7).unwrap();
        for g in blur.otf() {
            assert!((g - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn normalized_box_preserves_dc() {
        let k = Kernel::new(3, 3, vec![1.0 / 9.0; 9]).unwrap();
        let blur = psf_to_otf(&k, 6, 6).unwrap();
        assert!((blur.otf()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn oversized_psf_rejected() {
        let k = Kernel::new(5, 5, vec![0.04; 25]).unwrap();
        assert!(psf_to_otf(&k, 4, 8).is_err());
    }

    #[test]
    fn blur_of_delta_is_centered_psf() {
        // Dense-BCCB oracle: H e_{(3,3)} must equal the kernel circularly
        // placed around (3,3).
        let k = Kernel::gaussian(3, 3, 1.0).unwrap();
        let blur = psf_to_otf(&k, 8, 8).unwrap();
        let mut delta = Image::zeros(8, 8);
        delta.set(3, 3, 1.0);
        let out = apply_blur(&blur, &delta, false).unwrap();
        let dense = dense_blur_matrix(&k, 8, 8);
        for i in 0..8 {
            for j in 0..8 {
                assert!((out.at(i, j) - dense[(i * 8 + j, 3 * 8 + 3)]).abs() < 1e-12);
            }
        }
        // Spot check: the center tap sits exactly at (3,3).
        assert!((out.at(3, 3) - k.taps()[4]).abs() < 1e-12);
    }

    #[test]
    fn identity_otf_is_identity() {
        let x = lcg_image(6, 6, 2);
        let blur = SpectralBlur::identity(6, 6);
        let out = apply_blur(&blur, &x, false).unwrap();
        for (a, b) in out.data().iter().zip(x.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_through_normalized_kernel() {
        let k = Kernel::gaussian(5, 5, 2.0).unwrap();
        let blur = psf_to_otf(&k, 10, 10).unwrap();
        let c = Image::from_fn(10, 10, |_, _| 3.25);
        let out = apply_blur(&blur, &c, false).unwrap();
        for &v in out.data() {
            assert!((v - 3.25).abs() < 1e-12);
        }
    }

    #[test]
    fn blur_matches_dense_bccb_both_directions() {
        let k = Kernel::new(3, 3, vec![0.1, 0.2, 0.05, 0.15, 0.2, 0.1, 0.05, 0.1, 0.05]).unwrap();
        let blur = psf_to_otf(&k, 8, 8).unwrap();
        let dense = dense_blur_matrix(&k, 8, 8);
        let x = lcg_image(8, 8, 17);
        let xv = DVector::from_row_slice(x.data());

        let hx = apply_blur(&blur, &x, false).unwrap();
        let hx_dense = &dense * &xv;
        let ht = apply_blur(&blur, &x, true).unwrap();
        let ht_dense = dense.transpose() * &xv;
        let norm = hx_dense.norm();
        for i in 0..64 {
            assert!((hx.data()[i] - hx_dense[i]).abs() < 1e-10 * norm);
            assert!((ht.data()[i] - ht_dense[i]).abs() < 1e-10 * norm);
        }
    }

    #[test]
    fn decimate_9x9_by_3_keeps_corner_grid() {
        let x = Image::from_fn(9, 9, |i, j| (i * 9 + j) as f64);
        let dec = Decimator::from_hr(9, 9, 3, 3).unwrap();
        let y = decimate(&dec, &x).unwrap();
        assert_eq!(y.dims(), (3, 3));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(y.at(i, j), x.at(3 * i, 3 * j));
            }
        }
    }

    #[test]
    fn unit_factors_are_identity() {
        let x = lcg_image(5, 4, 3);
        let dec = Decimator::from_hr(5, 4, 1, 1).unwrap();
        assert_eq!(decimate(&dec, &x).unwrap().data(), x.data());
        assert_eq!(upsample_zero(&dec, &x).unwrap().data(), x.data());
        assert_eq!(mask_sbar(&dec, &x).unwrap().data(), x.data());
    }

    #[test]
    fn decimate_matches_dense_selection() {
        let x = lcg_image(8, 8, 5);
        let dec = Decimator::from_hr(8, 8, 2, 2).unwrap();
        let s = dense_decimation_matrix(&dec);
        let y = decimate(&dec, &x).unwrap();
        let y_dense = &s * DVector::from_row_slice(x.data());
        for i in 0..y.len() {
            assert!((y.data()[i] - y_dense[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn upsample_zero_mask_positions() {
        let y = lcg_image(3, 3, 8);
        let dec = Decimator::new(3, 3, 3, 3).unwrap();
        let up = upsample_zero(&dec, &y).unwrap();
        assert_eq!(up.dims(), (9, 9));
        for i in 0..9 {
            for j in 0..9 {
                if i % 3 == 0 && j % 3 == 0 {
                    assert_eq!(up.at(i, j), y.at(i / 3, j / 3));
                } else {
                    assert_eq!(up.at(i, j), 0.0);
                }
            }
        }
        // S S^H = I
        let back = decimate(&dec, &up).unwrap();
        assert_eq!(back.data(), y.data());
    }

    #[test]
    fn s_st_is_identity_across_shapes() {
        for (ml, nl, dr, dc) in [(1, 1, 1, 1), (3, 4, 2, 5), (5, 2, 4, 1), (7, 7, 3, 3)] {
            let dec = Decimator::new(ml, nl, dr, dc).unwrap();
            let y = lcg_image(ml, nl, (ml * 31 + nl * 7 + dr) as u64);
            let back = decimate(&dec, &upsample_zero(&dec, &y).unwrap()).unwrap();
            assert_eq!(back.data(), y.data(), "S S^H != I at {ml}x{nl} d={dr}x{dc}");
        }
    }

    #[test]
    fn decimation_adjoint_identity() {
        // <S^H y, x> = <y, S x> on random inputs.
        let dec = Decimator::new(3, 4, 2, 3).unwrap();
        let x = lcg_image(6, 12, 21);
        let y = lcg_image(3, 4, 22);
        let lhs = dot(&upsample_zero(&dec, &y).unwrap(), &x);
        let rhs = dot(&y, &decimate(&dec, &x).unwrap());
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn mask_is_idempotent_and_matches_dense() {
        let dec = Decimator::from_hr(8, 8, 2, 2).unwrap();
        let x = lcg_image(8, 8, 30);
        let once = mask_sbar(&dec, &x).unwrap();
        let twice = mask_sbar(&dec, &once).unwrap();
        assert_eq!(once.data(), twice.data());

        let s = dense_decimation_matrix(&dec);
        let sbar = s.transpose() * &s;
        let dense = &sbar * DVector::from_row_slice(x.data());
        for i in 0..x.len() {
            assert!((once.data()[i] - dense[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_spectra_vanish_on_constants() {
        let gp = build_gradients(6, 5);
        let c = Image::from_fn(6, 5, |_, _| 2.0);
        let dh = gp.apply(&c, GradientAxis::Rows, false).unwrap();
        let dv = gp.apply(&c, GradientAxis::Cols, false).unwrap();
        assert!(dh.data().iter().all(|&v| v.abs() < 1e-12));
        assert!(dv.data().iter().all(|&v| v.abs() < 1e-12));
        // sigma_h vanishes along the p = 0 row of the frequency grid.
        for q in 0..5 {
            assert!(gp.sigma_h()[q].norm() < 1e-15);
        }
    }

    #[test]
    fn spectral_gradient_matches_direct_difference() {
        let gp = build_gradients(6, 6);
        let x = lcg_image(6, 6, 77);
        let dh = gp.apply(&x, GradientAxis::Rows, false).unwrap();
        let dv = gp.apply(&x, GradientAxis::Cols, false).unwrap();
        let dh_direct = diff_rows(&x);
        let dv_direct = diff_cols(&x);
        for i in 0..x.len() {
            assert!((dh.data()[i] - dh_direct.data()[i]).abs() < 1e-12);
            assert!((dv.data()[i] - dv_direct.data()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_adjoints_agree_spatially_and_spectrally() {
        let gp = build_gradients(5, 7);
        let x = lcg_image(5, 7, 41);
        let z = lcg_image(5, 7, 42);
        // <Dh x, z> = <x, Dh^H z>
        let lhs = dot(&gp.apply(&x, GradientAxis::Rows, false).unwrap(), &z);
        let rhs = dot(&x, &gp.apply(&z, GradientAxis::Rows, true).unwrap());
        assert!((lhs - rhs).abs() < 1e-10);
        let spec = gp.apply(&z, GradientAxis::Cols, true).unwrap();
        let spat = diff_cols_adjoint(&z);
        for i in 0..z.len() {
            assert!((spec.data()[i] - spat.data()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn blur_adjoint_inner_product() {
        let k = Kernel::gaussian(3, 5, 1.5).unwrap();
        let blur = psf_to_otf(&k, 6, 10).unwrap();
        let x = lcg_image(6, 10, 51);
        let z = lcg_image(6, 10, 52);
        let lhs = dot(&apply_blur(&blur, &x, false).unwrap(), &z);
        let rhs = dot(&x, &apply_blur(&blur, &z, true).unwrap());
        assert!((lhs - rhs).abs() < 1e-10 * (x.norm() * z.norm()));
    }

    #[test]
    fn otf_conjugate_symmetry_for_real_psf() {
        let k = Kernel::gaussian(3, 3, 2.0).unwrap();
        let blur = psf_to_otf(&k, 6, 8).unwrap();
        for p in 0..6 {
            for q in 0..8 {
                let a = blur.otf()[p * 8 + q];
                let b = blur.otf()[((6 - p) % 6) * 8 + (8 - q) % 8];
                assert!((a - b.conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_spec_parsing() {
        let k = Kernel::from_spec("gaussian:9x9:3").unwrap();
        assert_eq!((k.rows(), k.cols()), (9, 9));
        assert!((k.taps().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(Kernel::from_spec("gaussian:9x9").is_err());
        assert!(Kernel::from_spec("gaussian:ax9:3").is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.txt");
        std::fs::write(&path, "2 3\n1 2 3\n4 5 6\n").unwrap();
        let k = Kernel::from_file(&path).unwrap();
        assert_eq!(k.taps(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        std::fs::write(&path, "2 3\n1 2\n").unwrap();
        assert!(Kernel::from_file(&path).is_err());
    }
}
