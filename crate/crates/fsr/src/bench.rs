//! Desk-scale reproduction of the experimental protocol: regularization
//! sweeps, and wall-clock scaling of the closed-form solve across image
//! sizes. Everything emits CSV.

use std::time::Instant;

use rayon::prelude::*;

use crate::admm::{admm_solve, AdmmConfig, Prior};
use crate::baselines::bicubic_upsample;
use crate::error::Result;
use crate::metrics::{compute_metrics, degrade, DegradationSpec};
use crate::operators::{psf_to_otf, Decimator, Kernel};
use crate::raster::Image;
use crate::solver::{solve_l2_gradient, solve_l2_image};
use crate::synth::composite;
use crate::operators::{diff_cols, diff_rows};

/// Which solver a sweep exercises, and where its prior comes from.
#[derive(Debug, Clone)]
pub enum SolverSpec {
    /// Image-domain l2 with the bicubic upsample as prior mean (Case 1).
    L2ImageBicubic,
    /// Image-domain l2 with the ground truth as prior mean (Case 2).
    L2ImageTruth,
    /// Gradient-domain l2 against the true gradient field.
    L2GradientTruth { sigma: f64 },
    /// Splitting solver with the TV prior.
    AdmmTv { max_iters: usize, rel_obj_tol: f64 },
    /// Splitting solver with the wavelet-l1 prior.
    AdmmWaveletL1 { levels: usize, max_iters: usize, rel_obj_tol: f64 },
}

/// One sweep row; `rmse`/`psnr` are absent when the solver failed.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub tau: f64,
    pub rmse: Option<f64>,
    pub psnr: Option<f64>,
    pub time_s: f64,
    pub status: &'static str,
}

/// Degrade once per grid point with the fixed seed, solve, measure.
/// Independent grid points run concurrently; each row is deterministic
/// given the spec seed.
pub fn sweep_tau(
    x_true: &Image,
    spec: &DegradationSpec,
    solver: &SolverSpec,
    taus: &[f64],
) -> Result<Vec<SweepRow>> {
    let rows: Vec<SweepRow> = taus
        .par_iter()
        .map(|&tau| sweep_point(x_true, spec, solver, tau))
        .collect();
    Ok(rows)
}

fn sweep_point(x_true: &Image, spec: &DegradationSpec, solver: &SolverSpec, tau: f64) -> SweepRow {
    let start = Instant::now();
    let outcome = (|| -> Result<(f64, f64)> {
        let (y, _) = degrade(x_true, spec)?;
        let (mh, nh) = x_true.dims();
        let dec = Decimator::from_hr(mh, nh, spec.dr, spec.dc)?;
        let blur = psf_to_otf(&spec.kernel, mh, nh)?;
        let x_hat = match solver {
            SolverSpec::L2ImageBicubic => {
                let xbar = bicubic_upsample(&y, spec.dr, spec.dc);
                solve_l2_image(&y, &blur, &dec, &xbar, tau)?
            }
            SolverSpec::L2ImageTruth => solve_l2_image(&y, &blur, &dec, x_true, tau)?,
            SolverSpec::L2GradientTruth { sigma } => {
                let vh = diff_rows(x_true);
                let vv = diff_cols(x_true);
                solve_l2_gradient(&y, &blur, &dec, (&vh, &vv), tau, *sigma)?
            }
            SolverSpec::AdmmTv { max_iters, rel_obj_tol } => {
                let cfg = AdmmConfig {
                    tau,
                    mu: None,
                    max_iters: *max_iters,
                    rel_obj_tol: *rel_obj_tol,
                    record_trace: false,
                };
                admm_solve(&y, &blur, &dec, Prior::Tv, &cfg, None)?.x
            }
            SolverSpec::AdmmWaveletL1 { levels, max_iters, rel_obj_tol } => {
                let cfg = AdmmConfig {
                    tau,
                    mu: None,
                    max_iters: *max_iters,
                    rel_obj_tol: *rel_obj_tol,
                    record_trace: false,
                };
                admm_solve(&y, &blur, &dec, Prior::WaveletL1 { levels: *levels }, &cfg, None)?.x
            }
        };
        let report = compute_metrics(x_true, &x_hat, None)?;
        Ok((report.rmse, report.psnr_db))
    })();
    let time_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok((rmse, psnr)) => SweepRow { tau, rmse: Some(rmse), psnr: Some(psnr), time_s, status: "ok" },
        Err(_) => SweepRow { tau, rmse: None, psnr: None, time_s, status: "failed" },
    }
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("tau,rmse,psnr,time_s,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{}\n",
            r.tau,
            r.rmse.map(|v| v.to_string()).unwrap_or_default(),
            r.psnr.map(|v| v.to_string()).unwrap_or_default(),
            r.time_s,
            r.status
        ));
    }
    out
}

/// One scaling measurement: HR unknown count, median solve seconds, and
/// the ratio against the previous (smaller) size.
#[derive(Debug, Clone)]
pub struct ScaleRow {
    pub nh: usize,
    pub time_s: f64,
    pub time_ratio: Option<f64>,
}

/// Median-of-`reps` wall time of the closed-form image-domain solve at each
/// square HR size. Runs strictly sequentially so timings are not skewed by
/// contention.
pub fn scaling_bench(sizes: &[usize], kernel: &Kernel, dr: usize, dc: usize, reps: usize) -> Result<Vec<ScaleRow>> {
    let mut rows: Vec<ScaleRow> = Vec::with_capacity(sizes.len());
    for &side in sizes {
        let truth = composite(side, side, 42, 1.0);
        let dec = Decimator::from_hr(side, side, dr, dc)?;
        let blur = psf_to_otf(kernel, side, side)?;
        let spec = DegradationSpec {
            kernel: kernel.clone(),
            dr,
            dc,
            bsnr_db: 30.0,
            rng_seed: 9,
        };
        let (y, _) = degrade(&truth, &spec)?;
        let xbar = bicubic_upsample(&y, dr, dc);

        // Warm-up outside the timed region (plan/allocator effects).
        let _ = solve_l2_image(&y, &blur, &dec, &xbar, 0.1)?;
        let mut times: Vec<f64> = (0..reps.max(1))
            .map(|_| {
                let t0 = Instant::now();
                let _ = solve_l2_image(&y, &blur, &dec, &xbar, 0.1);
                t0.elapsed().as_secs_f64()
            })
            .collect();
        times.sort_by(f64::total_cmp);
        let median = times[times.len() / 2];
        let ratio = rows.last().map(|prev: &ScaleRow| median / prev.time_s);
        rows.push(ScaleRow { nh: side * side, time_s: median, time_ratio: ratio });
    }
    Ok(rows)
}

pub fn scaling_to_csv(rows: &[ScaleRow]) -> String {
    let mut out = String::from("nh,time_s,time_ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{}\n",
            r.nh,
            r.time_s,
            r.time_ratio.map(|v| format!("{v:.3}")).unwrap_or_default()
        ));
    }
    out
}
