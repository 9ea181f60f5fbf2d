//! Wall-clock scaling of the closed-form solve across HR sizes. Doubling
//! the side quadruples the pixel count; the N log N discipline keeps the
//! measured ratio near 4.
//!
//! Run: `cargo run --release --example runtime_scaling`

use fsr::bench::{scaling_bench, scaling_to_csv};
use fsr::operators::Kernel;

fn main() -> fsr::Result<()> {
    let kernel = Kernel::from_spec("gaussian:9x9:3")?;
    let rows = scaling_bench(&[64, 128, 256, 512], &kernel, 4, 4, 5)?;
    print!("{}", scaling_to_csv(&rows));
    for w in rows.windows(2) {
        let ratio = w[1].time_s / w[0].time_s;
        println!(
            "# {} -> {} pixels: x{:.2} per 4x area (x{:.2} per 2x step)",
            w[0].nh,
            w[1].nh,
            ratio,
            ratio.sqrt()
        );
    }
    Ok(())
}
