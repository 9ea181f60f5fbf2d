//! Forward degradation model `y = S H x + n` with BSNR-calibrated noise,
//! and the evaluation metrics (RMSE, PSNR, ISNR, MSSIM).
//!
//! Noise generation is SplitMix64 -> Box-Muller, fully determined by the
//! spec's seed, so degraded observations are reproducible bit for bit.

use crate::error::{FsrError, Result};
use crate::operators::{apply_blur, decimate, psf_to_otf, Decimator, Kernel};
use crate::raster::Image;

// ---------------------------------------------------------------------------
// Seeded Gaussian generator
// ---------------------------------------------------------------------------

/// SplitMix64: 64-bit counter-based generator (Steele et al.), used here as
/// the uniform source under Box-Muller.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; generates in pairs and caches the
    /// sine branch.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let mag = (-2.0 * u1.ln()).sqrt();
        let ang = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(mag * ang.sin());
        mag * ang.cos()
    }
}

// ---------------------------------------------------------------------------
// Degradation
// ---------------------------------------------------------------------------

/// Specification of one simulated acquisition.
#[derive(Debug, Clone)]
pub struct DegradationSpec {
    pub kernel: Kernel,
    pub dr: usize,
    pub dc: usize,
    /// Blurred-signal-to-noise ratio in dB; `f64::INFINITY` disables noise.
    pub bsnr_db: f64,
    pub rng_seed: u64,
}

impl DegradationSpec {
    fn validate(&self) -> Result<()> {
        if self.dr == 0 || self.dc == 0 {
            return Err(FsrError::invalid("decimation factors must be >= 1"));
        }
        if self.bsnr_db.is_nan() {
            return Err(FsrError::invalid("bsnr must not be NaN"));
        }
        Ok(())
    }
}

/// Applies `y = S H x + n` with the noise variance calibrated to the
/// requested BSNR:
/// `sigma_n^2 = ||S H x - mean(S H x)||^2 / (Nl * 10^(BSNR/10))`.
/// Returns the observation together with the realized `sigma_n`. A constant
/// blurred signal has zero variance and is defined as noise-free.
pub fn degrade(x: &Image, spec: &DegradationSpec) -> Result<(Image, f64)> {
    spec.validate()?;
    let (mh, nh) = x.dims();
    let dec = Decimator::from_hr(mh, nh, spec.dr, spec.dc)?;
    let blur = psf_to_otf(&spec.kernel, mh, nh)?;
    let hx = apply_blur(&blur, x, false)?;
    let shx = decimate(&dec, &hx)?;

    if spec.bsnr_db.is_infinite() {
        return Ok((shx, 0.0));
    }

    let n = shx.len() as f64;
    let mean = shx.data().iter().sum::<f64>() / n;
    let signal_energy: f64 = shx.data().iter().map(|v| (v - mean) * (v - mean)).sum();
    // Zero-variance signals (constants, up to FFT roundoff) are defined as
    // noise-free.
    let total_energy: f64 = shx.data().iter().map(|v| v * v).sum();
    if signal_energy <= 1e-24 * total_energy.max(f64::MIN_POSITIVE) {
        return Ok((shx, 0.0));
    }
    let sigma = (signal_energy / (n * 10f64.powf(spec.bsnr_db / 10.0))).sqrt();

    let mut rng = SplitMix64::new(spec.rng_seed);
    let mut noisy = shx.data().to_vec();
    for v in &mut noisy {
        *v += sigma * rng.next_gaussian();
    }
    Ok((Image::new(dec.ml(), dec.nl(), noisy, x.value_scale())?, sigma))
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Evaluation report.
///
/// `rmse` is the plain Euclidean error norm `||x - xhat||` (no `1/N`);
/// divide by `sqrt(N)` for the conventional root-mean-square variant.
/// `psnr_db` compares the peak sample over both images against the
/// root-*mean*-square error, which is the definition the reference results
/// are quoted in. `psnr_db` is infinite when the images are identical.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub rmse: f64,
    pub psnr_db: f64,
    pub isnr_db: Option<f64>,
    pub mssim: f64,
}

impl MetricsReport {
    /// Single-line JSON; non-finite PSNR serializes as the string "inf".
    pub fn to_json(&self) -> String {
        let psnr = if self.psnr_db.is_finite() {
            format!("{}", self.psnr_db)
        } else {
            "\"inf\"".to_string()
        };
        let isnr = match self.isnr_db {
            Some(v) if v.is_finite() => format!("{v}"),
            Some(_) => "\"inf\"".to_string(),
            None => "null".to_string(),
        };
        format!(
            "{{\"rmse\":{},\"psnr_db\":{},\"isnr_db\":{},\"mssim\":{}}}",
            self.rmse, psnr, isnr, self.mssim
        )
    }
}

/// SSIM window side (clamped to the image dimensions).
const SSIM_WINDOW: usize = 8;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Computes RMSE, PSNR, MSSIM and (when a baseline interpolation is given)
/// ISNR of `estimate` against `reference`.
pub fn compute_metrics(
    reference: &Image,
    estimate: &Image,
    interp_baseline: Option<&Image>,
) -> Result<MetricsReport> {
    if reference.dims() != estimate.dims() {
        return Err(FsrError::dimension("metrics need equal-sized images"));
    }
    if let Some(b) = interp_baseline {
        if b.dims() != reference.dims() {
            return Err(FsrError::dimension("baseline dims mismatch"));
        }
    }
    let n = reference.len() as f64;
    let err_energy: f64 = reference
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let rmse = err_energy.sqrt();
    let peak = reference
        .data()
        .iter()
        .chain(estimate.data())
        .fold(f64::MIN, |m, &v| m.max(v));
    let psnr_db = if err_energy == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (peak / (err_energy / n).sqrt()).log10()
    };
    let isnr_db = match interp_baseline {
        None => None,
        Some(b) => {
            let base_energy: f64 = reference
                .data()
                .iter()
                .zip(b.data())
                .map(|(a, c)| (a - c) * (a - c))
                .sum();
            Some(if err_energy == 0.0 {
                f64::INFINITY
            } else {
                10.0 * (base_energy / err_energy).log10()
            })
        }
    };
    let mssim = mssim(reference, estimate);
    Ok(MetricsReport { rmse, psnr_db, isnr_db, mssim })
}

/// Mean SSIM over sliding uniform windows (8x8 where the image allows,
/// biased moment estimates, dynamic range from `value_scale`).
pub fn mssim(reference: &Image, estimate: &Image) -> f64 {
    let (m, n) = reference.dims();
    let wr = SSIM_WINDOW.min(m);
    let wc = SSIM_WINDOW.min(n);
    let l = reference.value_scale();
    let c1 = (SSIM_K1 * l) * (SSIM_K1 * l);
    let c2 = (SSIM_K2 * l) * (SSIM_K2 * l);
    let count = ((m - wr + 1) * (n - wc + 1)) as f64;
    let wn = (wr * wc) as f64;
    let mut total = 0.0;
    for i0 in 0..=(m - wr) {
        for j0 in 0..=(n - wc) {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in i0..i0 + wr {
                for j in j0..j0 + wc {
                    let a = reference.at(i, j);
                    let b = estimate.at(i, j);
                    sx += a;
                    sy += b;
                    sxx += a * a;
                    syy += b * b;
                    sxy += a * b;
                }
            }
            let mx = sx / wn;
            let my = sy / wn;
            let vx = sxx / wn - mx * mx;
            let vy = syy / wn - my * my;
            let cov = sxy / wn - mx * my;
            let ssim = ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            total += ssim;
        }
    }
    total / count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::bicubic_upsample;
    use crate::operators::{dense_blur_matrix, dense_decimation_matrix};
    use nalgebra::DVector;

    fn lcg_image(h: usize, w: usize, seed: u64) -> Image {
        let mut s = seed;
        Image::from_fn(h, w, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 40) as f64 / 16777216.0
        })
    }

    #[test]
    fn noise_free_matches_dense_forward_model() {
        let x = lcg_image(8, 8, 1);
        let k = Kernel::gaussian(3, 3, 1.0).unwrap();
        let spec = DegradationSpec {
            kernel: k.clone(),
            dr: 2,
            dc: 2,
            bsnr_db: f64::INFINITY,
            rng_seed: 0,
        };
        let (y, sigma) = degrade(&x, &spec).unwrap();
        assert_eq!(sigma, 0.0);
        let dec = Decimator::from_hr(8, 8, 2, 2).unwrap();
        let h = dense_blur_matrix(&k, 8, 8);
        let s = dense_decimation_matrix(&dec);
        let shx = s * (h * DVector::from_row_slice(x.data()));
        for i in 0..y.len() {
            assert!((y.data()[i] - shx[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_signal_defined_noise_free() {
        let x = Image::from_fn(8, 8, |_, _| 1.0);
        let spec = DegradationSpec {
            kernel: Kernel::gaussian(3, 3, 1.0).unwrap(),
            dr: 2,
            dc: 2,
            bsnr_db: 30.0,
            rng_seed: 7,
        };
        let (y, sigma) = degrade(&x, &spec).unwrap();
        assert_eq!(sigma, 0.0);
        for &v in y.data() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degrade_is_deterministic_under_seed() {
        let x = lcg_image(16, 16, 2);
        let spec = DegradationSpec {
            kernel: Kernel::gaussian(3, 3, 1.0).unwrap(),
            dr: 2,
            dc: 2,
            bsnr_db: 25.0,
            rng_seed: 42,
        };
        let (y1, s1) = degrade(&x, &spec).unwrap();
        let (y2, s2) = degrade(&x, &spec).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(y1.data(), y2.data());
        let spec2 = DegradationSpec { rng_seed: 43, ..spec };
        let (y3, _) = degrade(&x, &spec2).unwrap();
        assert_ne!(y1.data(), y3.data());
    }

    #[test]
    fn realized_bsnr_close_to_requested() {
        let x = lcg_image(64, 64, 3);
        let spec = DegradationSpec {
            kernel: Kernel::gaussian(3, 3, 1.0).unwrap(),
            dr: 2,
            dc: 2,
            bsnr_db: 30.0,
            rng_seed: 5,
        };
        let clean_spec = DegradationSpec { bsnr_db: f64::INFINITY, ..spec.clone() };
        let (clean, _) = degrade(&x, &clean_spec).unwrap();
        let (noisy, _) = degrade(&x, &spec).unwrap();
        let n = clean.len() as f64;
        let mean = clean.data().iter().sum::<f64>() / n;
        let sig: f64 = clean.data().iter().map(|v| (v - mean) * (v - mean)).sum();
        let noise: f64 = clean
            .data()
            .iter()
            .zip(noisy.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let measured = 10.0 * (sig / noise).log10();
        assert!((measured - 30.0).abs() < 0.5, "measured {measured}");
    }

    #[test]
    fn identical_images_give_zero_rmse_unit_ssim() {
        let x = lcg_image(16, 16, 9);
        let rep = compute_metrics(&x, &x, None).unwrap();
        assert_eq!(rep.rmse, 0.0);
        assert!(rep.psnr_db.is_infinite());
        assert!((rep.mssim - 1.0).abs() < 1e-12);
        assert!(rep.isnr_db.is_none());
        assert!(rep.to_json().contains("\"psnr_db\":\"inf\""));
    }

    #[test]
    fn isnr_zero_against_own_baseline() {
        let x = lcg_image(12, 12, 4);
        let base = bicubic_upsample(&lcg_image(6, 6, 5), 2, 2);
        let rep = compute_metrics(&x, &base, Some(&base)).unwrap();
        assert_eq!(rep.isnr_db, Some(0.0));
    }

    #[test]
    fn hand_computed_4x4_metrics() {
        // Frozen oracle: values computed by direct evaluation of the metric
        // formulas on this fixed 4x4 pair (window = whole image).
        let reference = Image::new(
            4,
            4,
            vec![
                0.0, 0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0.0, 0.5, 1.0, 0.5, 0.25, 0.25, 0.75,
                0.75,
            ],
            1.0,
        )
        .unwrap();
        let estimate = Image::new(
            4,
            4,
            vec![
                0.1, 0.2, 0.55, 0.7, 0.9, 0.8, 0.45, 0.3, 0.05, 0.45, 0.95, 0.55, 0.3, 0.2, 0.7,
                0.8,
            ],
            1.0,
        )
        .unwrap();
        let baseline = Image::new(4, 4, vec![0.5; 16], 1.0).unwrap();

        // Independent recomputation, spreadsheet style.
        let diffs: Vec<f64> = reference
            .data()
            .iter()
            .zip(estimate.data())
            .map(|(a, b)| a - b)
            .collect();
        let err_energy: f64 = diffs.iter().map(|d| d * d).sum();
        let exp_rmse = err_energy.sqrt();
        let exp_psnr = 20.0 * (1.0 / (err_energy / 16.0).sqrt()).log10();
        let base_energy: f64 = reference.data().iter().map(|a| (a - 0.5) * (a - 0.5)).sum();
        let exp_isnr = 10.0 * (base_energy / err_energy).log10();

        let rep = compute_metrics(&reference, &estimate, Some(&baseline)).unwrap();
        assert!((rep.rmse - exp_rmse).abs() < 1e-12);
        assert!((rep.psnr_db - exp_psnr).abs() < 1e-12);
        assert!((rep.isnr_db.unwrap() - exp_isnr).abs() < 1e-12);

        // Frozen literals from the oracle above.
        assert!((rep.rmse - 0.23452078799117151).abs() < 1e-12);
        assert!((rep.psnr_db - 24.63757293161681).abs() < 1e-10);
        assert!((rep.isnr_db.unwrap() - 14.357285695614372).abs() < 1e-10);
        assert!((rep.mssim - 0.9801401025492881).abs() < 1e-10);
    }

    #[test]
    fn psnr_decreases_with_added_noise() {
        let x = lcg_image(32, 32, 6);
        let mut rng = SplitMix64::new(10);
        let mildly_noisy = x.map(|v| v); // identical
        let mut very_noisy = x.clone();
        for v in very_noisy.data_mut() {
            *v += 0.1 * rng.next_gaussian();
        }
        let p_clean = compute_metrics(&x, &mildly_noisy, None).unwrap().psnr_db;
        let p_noisy = compute_metrics(&x, &very_noisy, None).unwrap().psnr_db;
        assert!(p_noisy < p_clean);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = lcg_image(4, 4, 1);
        let b = lcg_image(4, 5, 2);
        assert!(compute_metrics(&a, &b, None).is_err());
        assert!(compute_metrics(&a, &a, Some(&b)).is_err());
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of SplitMix64 with seed 0, cross-checked against the
        // published reference sequence.
        let mut g = SplitMix64::new(0);
        assert_eq!(g.next_u64(), 0xE220A8397B1DCDAF);
        assert_eq!(g.next_u64(), 0x6E789E6AA1B965F4);
        assert_eq!(g.next_u64(), 0x06C45D188009454F);
    }
}
