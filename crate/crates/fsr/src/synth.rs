//! Procedurally generated test images used by the bench harness, the
//! examples and the acceptance suite (the reference photo sets are not
//! shipped).

use crate::metrics::SplitMix64;
use crate::raster::Image;

/// Alternating cells of 0 and `scale`.
pub fn checkerboard(rows: usize, cols: usize, cell: usize, scale: f64) -> Image {
    let cell = cell.max(1);
    Image::from_fn(rows, cols, |i, j| {
        if ((i / cell) + (j / cell)) % 2 == 0 {
            0.0
        } else {
            scale
        }
    })
    .with_value_scale(scale)
}

/// Diagonal linear ramp from 0 to `scale`.
pub fn ramp(rows: usize, cols: usize, scale: f64) -> Image {
    let denom = (rows + cols - 2).max(1) as f64;
    Image::from_fn(rows, cols, |i, j| scale * (i + j) as f64 / denom).with_value_scale(scale)
}

/// Sum of random Gaussian bumps on a mid-gray background.
pub fn gaussian_blobs(rows: usize, cols: usize, n_blobs: usize, seed: u64, scale: f64) -> Image {
    let mut rng = SplitMix64::new(seed);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..n_blobs)
        .map(|_| {
            let ci = rng.next_f64() * rows as f64;
            let cj = rng.next_f64() * cols as f64;
            let radius = (0.03 + 0.12 * rng.next_f64()) * rows.min(cols) as f64;
            let amp = (rng.next_f64() - 0.35) * scale;
            (ci, cj, radius, amp)
        })
        .collect();
    let mut img = Image::from_fn(rows, cols, |i, j| {
        let mut v = 0.45 * scale;
        for &(ci, cj, r, amp) in &blobs {
            let di = i as f64 - ci;
            let dj = j as f64 - cj;
            v += amp * (-(di * di + dj * dj) / (2.0 * r * r)).exp();
        }
        v
    });
    for v in img.data_mut() {
        *v = v.clamp(0.0, scale);
    }
    img.with_value_scale(scale)
}

/// Piecewise-constant random blocks; the natural habitat of TV and
/// Haar-wavelet priors.
pub fn blocks(rows: usize, cols: usize, cell: usize, seed: u64, scale: f64) -> Image {
    let cell = cell.max(1);
    let mut rng = SplitMix64::new(seed);
    let bw = cols.div_ceil(cell);
    let bh = rows.div_ceil(cell);
    let vals: Vec<f64> = (0..bh * bw).map(|_| rng.next_f64() * scale).collect();
    Image::from_fn(rows, cols, |i, j| vals[(i / cell) * bw + (j / cell)]).with_value_scale(scale)
}

/// Photo-like composite: blobs, a ramp and a few hard edges, so the spectrum
/// has both smooth regions and genuine high-frequency content.
pub fn composite(rows: usize, cols: usize, seed: u64, scale: f64) -> Image {
    let blobs = gaussian_blobs(rows, cols, 12, seed, scale);
    let slope = ramp(rows, cols, scale);
    let mut img = Image::from_fn(rows, cols, |i, j| {
        let mut v = 0.55 * blobs.at(i, j) + 0.25 * slope.at(i, j);
        // Hard-edged rectangle and diagonal band.
        if i > rows / 5 && i < rows / 2 && j > cols / 6 && j < cols / 3 {
            v += 0.3 * scale;
        }
        if (i + 2 * j) % cols < cols / 9 {
            v += 0.15 * scale;
        }
        v
    });
    for v in img.data_mut() {
        *v = v.clamp(0.0, scale);
    }
    img.with_value_scale(scale)
}
