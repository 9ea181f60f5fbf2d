//! Command-line front end: degradation simulation, the SR solvers, the
//! verification suite, metrics, and the bench harness. All numeric work
//! lives in the library; this binary parses flags, moves files and sets
//! exit codes (0 ok, 1 verification failure, 2 usage, 3 io, 4 numerical).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fsr::admm::{admm_solve, trace_to_csv, AdmmConfig, Prior};
use fsr::baselines::bicubic_upsample;
use fsr::bench::{scaling_bench, scaling_to_csv, sweep_tau, sweep_to_csv, SolverSpec};
use fsr::error::FsrError;
use fsr::io::{load_any, load_image, write_image_depth, BitDepth, LoadedImage};
use fsr::metrics::{compute_metrics, degrade, DegradationSpec};
use fsr::operators::{decimate, diff_cols, diff_rows, psf_to_otf, Decimator, Kernel};
use fsr::raster::{extract_luminance, recombine_luminance, Image};
use fsr::solver::{back_project, solve_l2_gradient, solve_l2_image, DEFAULT_GRADIENT_SIGMA};
use fsr::verify::{alias_structure_max_err, run_suite, CheckReport};
use fsr::wavelet::HaarDwt;

#[derive(Parser)]
#[command(name = "fsr", version, about = "Fast single-image super-resolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the observation model: blur, decimate, add BSNR-calibrated noise.
    Degrade(DegradeArgs),
    /// Super-resolve a low-resolution image.
    Sr(SrArgs),
    /// Run the dense-vs-spectral identity suite.
    Oracle(OracleArgs),
    /// Compare two images (RMSE / PSNR / ISNR / MSSIM as JSON).
    Metrics(MetricsArgs),
    /// Parameter sweeps and runtime scaling tables (CSV).
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
struct DegradeArgs {
    /// High-resolution input image (pgm / png / fsr).
    #[arg(long)]
    input: PathBuf,
    /// Low-resolution output image.
    #[arg(long)]
    output: PathBuf,
    /// Kernel spec: `gaussian:RxC:VAR` or a kernel file path.
    #[arg(long, default_value = "gaussian:9x9:3")]
    kernel: String,
    /// Column decimation factor.
    #[arg(long, default_value_t = 4)]
    dx: usize,
    /// Row decimation factor.
    #[arg(long, default_value_t = 4)]
    dy: usize,
    /// Blurred-signal-to-noise ratio in dB (`inf` disables noise).
    #[arg(long, default_value_t = 30.0)]
    bsnr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quantization depth for pgm/png outputs.
    #[arg(long, default_value_t = 8)]
    bits: u32,
}

#[derive(Args)]
struct SrArgs {
    /// One of: l2-image, l2-gradient, backproject, admm-tv, admm-l1.
    #[arg(long)]
    method: String,
    /// Low-resolution observation.
    #[arg(long)]
    input: PathBuf,
    /// High-resolution estimate destination.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "gaussian:9x9:3")]
    kernel: String,
    #[arg(long, default_value_t = 4)]
    dx: usize,
    #[arg(long, default_value_t = 4)]
    dy: usize,
    /// Regularization weight.
    #[arg(long)]
    tau: f64,
    /// Splitting penalty (defaults to 10 * tau).
    #[arg(long)]
    mu: Option<f64>,
    /// Small l2 weight of the gradient-domain model.
    #[arg(long, default_value_t = DEFAULT_GRADIENT_SIGMA)]
    sigma: f64,
    /// Relative objective tolerance of the splitting loop.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Prior mean image for l2-image (defaults to the bicubic upsample).
    #[arg(long)]
    xbar: Option<PathBuf>,
    /// Gradient-field pair `vh.fsr,vv.fsr` for l2-gradient (defaults to the
    /// gradient of the bicubic upsample).
    #[arg(long)]
    gradfield: Option<String>,
    /// External HR estimate to back-project.
    #[arg(long)]
    x0: Option<PathBuf>,
    /// Wavelet decomposition depth for admm-l1 (defaults to the deepest
    /// depth the dimensions allow, capped at 4).
    #[arg(long)]
    levels: Option<usize>,
    /// Write the per-iteration trace CSV here (admm methods).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Ground truth; when given, a metrics JSON line goes to stdout.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Exit 4 when the splitting loop hits max-iters without converging.
    #[arg(long, default_value_t = false)]
    strict: bool,
    #[arg(long, default_value_t = 8)]
    bits: u32,
}

#[derive(Args)]
struct OracleArgs {
    /// Dense-instance budget (max unknowns per identity check).
    #[arg(long, default_value_t = 256)]
    max_size: usize,
    /// Corrupt the frequency map first (negative control; must fail).
    #[arg(long, hide = true, default_value_t = false)]
    corrupt_map: bool,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    estimate: PathBuf,
    /// Interpolation baseline enabling ISNR.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Report the conventional sqrt(MSE) instead of the plain error norm.
    #[arg(long, default_value_t = false)]
    normalized: bool,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Metrics across a tau grid at a fixed degradation.
    Sweep(SweepArgs),
    /// Median solve time across HR sizes.
    Scaling(ScalingArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// High-resolution ground-truth image.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "gaussian:9x9:3")]
    kernel: String,
    #[arg(long, default_value_t = 4)]
    dx: usize,
    #[arg(long, default_value_t = 4)]
    dy: usize,
    #[arg(long, default_value_t = 30.0)]
    bsnr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solver: l2-image-bicubic, l2-image-truth, l2-gradient, admm-tv, admm-l1.
    #[arg(long, default_value = "l2-image-bicubic")]
    method: String,
    /// Comma-separated tau grid.
    #[arg(long)]
    taus: String,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
}

#[derive(Args)]
struct ScalingArgs {
    /// Comma-separated square HR sizes, e.g. 128,256,512.
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value = "gaussian:9x9:3")]
    kernel: String,
    #[arg(long, default_value_t = 4)]
    dx: usize,
    #[arg(long, default_value_t = 4)]
    dy: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Degrade(args) => cmd_degrade(args),
        Command::Sr(args) => cmd_sr(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Bench(BenchCommand::Sweep(args)) => cmd_sweep(args),
        Command::Bench(BenchCommand::Scaling(args)) => cmd_scaling(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fsr: {e}");
            ExitCode::from(exit_code_of(&e))
        }
    }
}

/// FSR_THREADS caps the rayon pool used for concurrent sweep rows.
fn configure_threads() {
    if let Ok(v) = std::env::var("FSR_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn exit_code_of(e: &FsrError) -> u8 {
    match e {
        FsrError::Io(_) | FsrError::Format(_) => 3,
        FsrError::Invalid(_) | FsrError::Dimension(_) => 2,
        FsrError::Numerical(_) => 4,
    }
}

fn parse_bits(bits: u32) -> Result<BitDepth, FsrError> {
    match bits {
        8 => Ok(BitDepth::Eight),
        16 => Ok(BitDepth::Sixteen),
        other => Err(FsrError::invalid(format!("--bits must be 8 or 16, got {other}"))),
    }
}

/// A grayscale working image plus the chroma planes when the source was
/// color (processed per the luminance-only protocol).
struct Luma {
    y: Image,
    chroma: Option<(Image, Image)>,
}

fn load_luma(path: &Path) -> Result<Luma, FsrError> {
    match load_any(path)? {
        LoadedImage::Gray(y) => Ok(Luma { y, chroma: None }),
        LoadedImage::Rgb { r, g, b } => {
            let (y, cb, cr) = extract_luminance(&r, &g, &b)?;
            Ok(Luma { y, chroma: Some((cb, cr)) })
        }
    }
}

fn is_png(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).map(|e| e.eq_ignore_ascii_case("png")) == Some(true)
}

fn write_color_png(
    y: &Image,
    cb: &Image,
    cr: &Image,
    path: &Path,
    depth: BitDepth,
) -> Result<(), FsrError> {
    let (r, g, b) = recombine_luminance(y, cb, cr)?;
    let maxq = depth.max_value();
    let scale = y.value_scale();
    let q = |img: &Image, i: usize| (img.data()[i].clamp(0.0, scale) / scale * maxq).round();
    match depth {
        BitDepth::Eight => {
            let mut buf = Vec::with_capacity(y.len() * 3);
            for i in 0..y.len() {
                buf.push(q(&r, i) as u8);
                buf.push(q(&g, i) as u8);
                buf.push(q(&b, i) as u8);
            }
            image::save_buffer(
                path,
                &buf,
                y.width() as u32,
                y.height() as u32,
                image::ExtendedColorType::Rgb8,
            )
        }
        BitDepth::Sixteen => {
            let mut buf = Vec::with_capacity(y.len() * 6);
            for i in 0..y.len() {
                for img in [&r, &g, &b] {
                    buf.extend_from_slice(&(q(img, i) as u16).to_ne_bytes());
                }
            }
            image::save_buffer(
                path,
                &buf,
                y.width() as u32,
                y.height() as u32,
                image::ExtendedColorType::Rgb16,
            )
        }
    }
    .map_err(|e| FsrError::format(format!("png encode failed: {e}")))
}

// ---------------------------------------------------------------------------
// degrade
// ---------------------------------------------------------------------------

fn cmd_degrade(args: DegradeArgs) -> Result<ExitCode, FsrError> {
    let depth = parse_bits(args.bits)?;
    let kernel = Kernel::from_spec(&args.kernel)?;
    let src = load_luma(&args.input)?;
    let spec = DegradationSpec {
        kernel,
        dr: args.dy,
        dc: args.dx,
        bsnr_db: args.bsnr,
        rng_seed: args.seed,
    };
    let (y, sigma_n) = degrade(&src.y, &spec)?;

    match (&src.chroma, is_png(&args.output)) {
        (Some((cb, cr)), true) => {
            // Chroma is only decimated; the SR pipeline upsamples it
            // bicubically later.
            let (mh, nh) = src.y.dims();
            let dec = Decimator::from_hr(mh, nh, args.dy, args.dx)?;
            let cb_lr = decimate(&dec, cb)?;
            let cr_lr = decimate(&dec, cr)?;
            write_color_png(&y, &cb_lr, &cr_lr, &args.output, depth)?;
        }
        _ => write_image_depth(&y, &args.output, depth)?,
    }

    let sidecar = format!(
        "{{\"sigma_n\":{},\"kernel\":\"{}\",\"dx\":{},\"dy\":{},\"bsnr_db\":{},\"seed\":{}}}",
        sigma_n,
        args.kernel,
        args.dx,
        args.dy,
        if args.bsnr.is_finite() { args.bsnr.to_string() } else { "\"inf\"".to_string() },
        args.seed
    );
    let sidecar_path = sidecar_path_for(&args.output);
    std::fs::write(&sidecar_path, format!("{sidecar}\n"))?;
    println!("{sidecar}");
    Ok(ExitCode::SUCCESS)
}

fn sidecar_path_for(output: &Path) -> PathBuf {
    let mut os = output.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

// ---------------------------------------------------------------------------
// sr
// ---------------------------------------------------------------------------

fn cmd_sr(args: SrArgs) -> Result<ExitCode, FsrError> {
    let depth = parse_bits(args.bits)?;
    let obs = load_luma(&args.input)?;
    let y = &obs.y;
    let (ml, nl) = y.dims();
    let dec = Decimator::new(ml, nl, args.dy, args.dx)?;
    let (mh, nh) = (dec.mh(), dec.nh());
    let kernel = Kernel::from_spec(&args.kernel)?;
    let blur = psf_to_otf(&kernel, mh, nh)?;

    let mut converged = true;
    let x_hat = match args.method.as_str() {
        "l2-image" => {
            let xbar = match &args.xbar {
                Some(p) => load_image(p)?,
                None => bicubic_upsample(y, args.dy, args.dx),
            };
            solve_l2_image(y, &blur, &dec, &xbar, args.tau)?
        }
        "l2-gradient" => {
            let (vh, vv) = match &args.gradfield {
                Some(pair) => {
                    let (a, b) = pair.split_once(',').ok_or_else(|| {
                        FsrError::invalid("--gradfield wants two comma-separated paths")
                    })?;
                    (load_image(a.trim())?, load_image(b.trim())?)
                }
                None => {
                    let up = bicubic_upsample(y, args.dy, args.dx);
                    (diff_rows(&up), diff_cols(&up))
                }
            };
            solve_l2_gradient(y, &blur, &dec, (&vh, &vv), args.tau, args.sigma)?
        }
        "backproject" => {
            let x0 = args
                .x0
                .as_ref()
                .ok_or_else(|| FsrError::invalid("--x0 is required for backproject"))?;
            back_project(y, &blur, &dec, &load_image(x0)?, args.tau)?
        }
        "admm-tv" | "admm-l1" => {
            let prior = if args.method == "admm-tv" {
                Prior::Tv
            } else {
                let levels = match args.levels {
                    Some(l) => l,
                    None => {
                        let l = HaarDwt::max_levels(mh, nh, 4);
                        if l == 0 {
                            return Err(FsrError::invalid(format!(
                                "HR dims {mh}x{nh} admit no wavelet decomposition"
                            )));
                        }
                        l
                    }
                };
                Prior::WaveletL1 { levels }
            };
            let cfg = AdmmConfig {
                tau: args.tau,
                mu: args.mu,
                max_iters: args.max_iters,
                rel_obj_tol: args.tol,
                record_trace: args.trace.is_some() || args.reference.is_some(),
            };
            let reference = match &args.reference {
                Some(p) => Some(load_luma(p)?.y),
                None => None,
            };
            let res = admm_solve(y, &blur, &dec, prior, &cfg, reference.as_ref())?;
            if let Some(trace_path) = &args.trace {
                std::fs::write(trace_path, trace_to_csv(&res.trace))?;
            }
            converged = res.converged;
            res.x
        }
        other => return Err(FsrError::invalid(format!("unknown --method '{other}'"))),
    };

    match (&obs.chroma, is_png(&args.output)) {
        (Some((cb, cr)), true) => {
            let cb_hr = bicubic_upsample(cb, args.dy, args.dx);
            let cr_hr = bicubic_upsample(cr, args.dy, args.dx);
            write_color_png(&x_hat, &cb_hr, &cr_hr, &args.output, depth)?;
        }
        _ => write_image_depth(&x_hat, &args.output, depth)?,
    }

    if let Some(ref_path) = &args.reference {
        let reference = load_luma(ref_path)?.y;
        let baseline = bicubic_upsample(y, args.dy, args.dx);
        let report = compute_metrics(&reference, &x_hat, Some(&baseline))?;
        println!("{}", report.to_json());
    }

    if args.strict && !converged {
        eprintln!("fsr: splitting loop hit max-iters without meeting the tolerance");
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode, FsrError> {
    let reports: Vec<CheckReport> = if args.corrupt_map {
        // Negative control: the corrupted map must blow the tolerance.
        use fsr::operators::SpectralBlur;
        use fsr::solver::AliasBands;
        let dec = Decimator::from_hr(4, 4, 2, 2)?;
        let mut bands = AliasBands::from_blur(&SpectralBlur::identity(4, 4), &dec)?;
        bands.corrupt_for_test();
        let err = alias_structure_max_err(&dec, &bands);
        vec![CheckReport {
            name: "alias-structure-corrupted".to_string(),
            pass: err <= 1e-10,
            max_err: err,
            tolerance: 1e-10,
            detail: "deliberately corrupted frequency map".to_string(),
        }]
    } else {
        run_suite(args.max_size)?
    };

    println!("check,pass,max_err,tolerance,detail");
    let mut all_pass = true;
    for r in &reports {
        println!(
            "{},{},{:.3e},{:.1e},{}",
            r.name, r.pass, r.max_err, r.tolerance, r.detail
        );
        all_pass &= r.pass;
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

fn cmd_metrics(args: MetricsArgs) -> Result<ExitCode, FsrError> {
    let reference = load_luma(&args.reference)?.y;
    let estimate = load_luma(&args.estimate)?.y;
    let baseline = match &args.baseline {
        Some(p) => Some(load_luma(p)?.y),
        None => None,
    };
    let mut report = compute_metrics(&reference, &estimate, baseline.as_ref())?;
    if args.normalized {
        report.rmse /= (reference.len() as f64).sqrt();
    }
    println!("{}", report.to_json());
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn parse_f64_list(s: &str) -> Result<Vec<f64>, FsrError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| FsrError::invalid(format!("bad number '{t}' in list")))
        })
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, FsrError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| FsrError::invalid(format!("bad size '{t}' in list")))
        })
        .collect()
}

fn emit_csv(csv: String, output: Option<&Path>) -> Result<(), FsrError> {
    match output {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, FsrError> {
    let taus = parse_f64_list(&args.taus)?;
    if taus.is_empty() || taus.iter().any(|&t| t <= 0.0) {
        return Err(FsrError::invalid("--taus needs a non-empty positive grid"));
    }
    let truth = load_luma(&args.input)?.y;
    let spec = DegradationSpec {
        kernel: Kernel::from_spec(&args.kernel)?,
        dr: args.dy,
        dc: args.dx,
        bsnr_db: args.bsnr,
        rng_seed: args.seed,
    };
    let solver = match args.method.as_str() {
        "l2-image-bicubic" => SolverSpec::L2ImageBicubic,
        "l2-image-truth" => SolverSpec::L2ImageTruth,
        "l2-gradient" => SolverSpec::L2GradientTruth { sigma: DEFAULT_GRADIENT_SIGMA },
        "admm-tv" => SolverSpec::AdmmTv { max_iters: args.max_iters, rel_obj_tol: args.tol },
        "admm-l1" => {
            let levels = HaarDwt::max_levels(truth.height(), truth.width(), 4).max(1);
            SolverSpec::AdmmWaveletL1 {
                levels,
                max_iters: args.max_iters,
                rel_obj_tol: args.tol,
            }
        }
        other => return Err(FsrError::invalid(format!("unknown sweep method '{other}'"))),
    };
    let rows = sweep_tau(&truth, &spec, &solver, &taus)?;
    emit_csv(sweep_to_csv(&rows), args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_scaling(args: ScalingArgs) -> Result<ExitCode, FsrError> {
    let sizes = parse_usize_list(&args.sizes)?;
    if sizes.is_empty() {
        return Err(FsrError::invalid("--sizes must not be empty"));
    }
    let kernel = Kernel::from_spec(&args.kernel)?;
    let rows = scaling_bench(&sizes, &kernel, args.dy, args.dx, args.reps)?;
    emit_csv(scaling_to_csv(&rows), args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
