//! File-format round trips: PGM at both depths, PNG, the lossless FSR1
//! float container, and luminance extraction from a color raster.
//!
//! Run: `cargo run --release --example image_files`

use fsr::io::{load_image, write_image, write_image_depth, BitDepth};
use fsr::raster::{extract_luminance, recombine_luminance};
use fsr::synth::{composite, ramp};

fn main() -> fsr::Result<()> {
    std::fs::create_dir_all("target/example-out")?;
    let img = composite(64, 64, 2, 255.0);

    for (name, depth) in [("pgm8.pgm", BitDepth::Eight), ("pgm16.pgm", BitDepth::Sixteen)] {
        let path = format!("target/example-out/{name}");
        write_image_depth(&img, &path, depth)?;
        let back = load_image(&path)?;
        let step = img.value_scale() / (depth.max_value() / 255.0 * 255.0);
        let rescale = img.value_scale() / back.value_scale();
        let worst = img
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b * rescale).abs())
            .fold(0.0f64, f64::max);
        println!("{name}: worst quantization error {worst:.4} (step {step:.4})");
    }

    // FSR1 keeps signed doubles exactly; useful for gradient fields.
    let grad = fsr::operators::diff_rows(&img);
    let path = "target/example-out/grad.fsr";
    write_image(&grad, path)?;
    let back = load_image(path)?;
    println!("fsr1 lossless: {}", back.data() == grad.data());

    // Luminance split and recombination.
    let r = composite(32, 32, 1, 255.0);
    let g = ramp(32, 32, 255.0);
    let b = composite(32, 32, 3, 255.0);
    let (y, cb, cr) = extract_luminance(&r, &g, &b)?;
    let (r2, _, _) = recombine_luminance(&y, &cb, &cr)?;
    let worst = r
        .data()
        .iter()
        .zip(r2.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("luminance round trip worst channel error: {worst:.2e}");
    Ok(())
}
