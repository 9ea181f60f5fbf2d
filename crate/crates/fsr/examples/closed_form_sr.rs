//! Image-domain l2 super-resolution with the closed-form frequency-domain
//! solver: one non-iterative solve per prior choice.
//!
//! Case 1 uses the bicubic upsample of the observation as the prior mean;
//! Case 2 uses the ground truth (the oracle setting that bounds what the
//! quadratic model can do).
//!
//! Run: `cargo run --release --example closed_form_sr`

use std::time::Instant;

use fsr::baselines::bicubic_upsample;
use fsr::metrics::{compute_metrics, degrade, DegradationSpec};
use fsr::operators::{psf_to_otf, Decimator, Kernel};
use fsr::solver::solve_l2_image;
use fsr::synth::composite;

fn main() -> fsr::Result<()> {
    let (side, factor) = (256, 4);
    let truth = composite(side, side, 12, 1.0);
    let kernel = Kernel::from_spec("gaussian:9x9:3")?;
    let spec = DegradationSpec {
        kernel: kernel.clone(),
        dr: factor,
        dc: factor,
        bsnr_db: 30.0,
        rng_seed: 1,
    };
    let (y, sigma) = degrade(&truth, &spec)?;
    println!("observation {}x{} at BSNR 30 dB (sigma_n = {sigma:.2e})", y.height(), y.width());

    let dec = Decimator::from_hr(side, side, factor, factor)?;
    let blur = psf_to_otf(&kernel, side, side)?;
    let baseline = bicubic_upsample(&y, factor, factor);
    let report = compute_metrics(&truth, &baseline, None)?;
    println!("bicubic baseline: PSNR {:.2} dB, MSSIM {:.3}", report.psnr_db, report.mssim);

    for (name, prior, tau) in [
        ("case 1 (bicubic prior)", &baseline, 3e-3),
        ("case 2 (truth prior)", &truth, 0.1),
    ] {
        let t0 = Instant::now();
        let x = solve_l2_image(&y, &blur, &dec, prior, tau)?;
        let dt = t0.elapsed().as_secs_f64();
        let rep = compute_metrics(&truth, &x, Some(&baseline))?;
        println!(
            "{name}: tau = {tau}, solve {dt:.4}s, PSNR {:.2} dB, ISNR {:+.2} dB, MSSIM {:.3}",
            rep.psnr_db,
            rep.isnr_db.unwrap(),
            rep.mssim
        );
    }
    Ok(())
}
