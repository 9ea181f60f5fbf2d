//! Fast single-image super-resolution.
//!
//! The observation model is `y = S H x + n`: an unknown HR image `x` is
//! cyclically blurred (`H`), decimated by integer factors (`S`) and hit by
//! white Gaussian noise. For quadratic (l2-l2) regularizers the minimizer
//! has a closed form that this crate evaluates entirely in the frequency
//! domain in `O(Nh log Nh)`: decimation folds the HR spectrum onto the LR
//! grid in alias classes of `d = dr * dc` frequencies, and the normal
//! equations decouple into one small Hermitian solve per LR frequency.
//! Non-quadratic priors (isotropic TV, wavelet-domain l1) reuse the same
//! closed form as the x-update inside a variable-splitting loop.
//!
//! Modules follow the pipeline:
//!
//! - [`raster`]: the `Image` value type and luminance extraction.
//! - [`io`]: PGM/PNG files plus the lossless `FSR1` float format.
//! - [`operators`]: blur, decimation and gradient operators with dense
//!   mirrors for verification.
//! - [`solver`]: the closed-form l2-l2 solver (image domain, gradient
//!   domain, back-projection).
//! - [`wavelet`]: orthonormal Haar analysis/synthesis.
//! - [`admm`]: the splitting scheme with TV and wavelet-l1 priors.
//! - [`baselines`]: dense direct solve, conjugate gradient, bicubic.
//! - [`metrics`]: BSNR-calibrated degradation and quality metrics.
//! - [`bench`]: tau sweeps and runtime scaling tables.
//! - [`verify`]: dense-matrix checks of the identities the solver rests on.
//!
//! The `examples/` directory demonstrates each capability end to end; the
//! `fsr` binary wraps the same entry points for scripting.

pub mod admm;
pub mod baselines;
pub mod bench;
pub mod error;
pub mod fft;
pub mod io;
pub mod metrics;
pub mod operators;
pub mod raster;
pub mod solver;
pub mod synth;
pub mod verify;
pub mod wavelet;

pub use error::{FsrError, Result};
pub use raster::Image;
