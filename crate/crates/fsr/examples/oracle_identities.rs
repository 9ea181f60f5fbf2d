//! The verification suite as a library call: dense-matrix checks of the
//! alias-class structure of `F S_bar F^H`, the Woodbury inverse formula,
//! and closed-form-vs-dense solver agreement. `fsr oracle` wraps the same
//! entry point.
//!
//! Run: `cargo run --release --example oracle_identities`

use fsr::verify::run_suite;

fn main() -> fsr::Result<()> {
    println!("{:<32} {:>6} {:>12} {:>9}  detail", "check", "pass", "max_err", "tol");
    let mut all = true;
    for rep in run_suite(128)? {
        println!(
            "{:<32} {:>6} {:>12.3e} {:>9.1e}  {}",
            rep.name, rep.pass, rep.max_err, rep.tolerance, rep.detail
        );
        all &= rep.pass;
    }
    println!("\nsuite {}", if all { "passed" } else { "FAILED" });
    std::process::exit(if all { 0 } else { 1 });
}
