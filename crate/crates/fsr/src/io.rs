//! File formats: PGM (P5, 8/16-bit), PNG grayscale read/write, PNG color
//! read, and the raw `FSR1` float64 format for lossless intermediates.
//!
//! `FSR1` layout: 16-byte header (`b"FSR1"`, `u32 height`, `u32 width`,
//! `u32 reserved`) followed by `height*width` little-endian f64 samples in
//! row-major order. The reserved word carries the image's `value_scale` as
//! f32 bits (0 is read back as 255, the legacy default), so signed data such
//! as gradient fields survives a round trip unchanged.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{FsrError, Result};
use crate::raster::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn max_value(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

/// Either a grayscale raster or the three channels of a color file.
pub enum LoadedImage {
    Gray(Image),
    Rgb { r: Image, g: Image, b: Image },
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default()
}

/// Loads a grayscale image, dispatching on the file extension
/// (`.pgm`, `.png`, `.fsr`). Color files are rejected here; use
/// [`load_any`] when chroma matters.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    match load_any(path.as_ref())? {
        LoadedImage::Gray(img) => Ok(img),
        LoadedImage::Rgb { .. } => Err(FsrError::format(format!(
            "{} is a color image; extract the luminance channel first",
            path.as_ref().display()
        ))),
    }
}

/// Loads a grayscale or color image.
pub fn load_any(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pgm" => Ok(LoadedImage::Gray(load_pgm(path)?)),
        "fsr" => Ok(LoadedImage::Gray(load_fsr1(path)?)),
        "png" => load_png(path),
        other => Err(FsrError::format(format!(
            "unsupported image extension '{other}' (expected pgm, png or fsr)"
        ))),
    }
}

/// Writes an image with 8-bit quantization for PGM/PNG, or losslessly for
/// `.fsr`. Samples are clipped to `[0, value_scale]` before quantization.
pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    write_image_depth(img, path, BitDepth::Eight)
}

pub fn write_image_depth(img: &Image, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pgm" => write_pgm(img, path, depth),
        "png" => write_png(img, path, depth),
        "fsr" => write_fsr1(img, path),
        other => Err(FsrError::format(format!(
            "unsupported image extension '{other}' (expected pgm, png or fsr)"
        ))),
    }
}

fn quantize(img: &Image, depth: BitDepth) -> Vec<u16> {
    let maxq = depth.max_value();
    let scale = img.value_scale();
    img.data()
        .iter()
        .map(|&v| {
            let clipped = v.clamp(0.0, scale);
            (clipped / scale * maxq).round() as u16
        })
        .collect()
}

// ---------------------------------------------------------------------------
// PGM (P5)
// ---------------------------------------------------------------------------

fn write_pgm(img: &Image, path: &Path, depth: BitDepth) -> Result<()> {
    let q = quantize(img, depth);
    let mut out = Vec::with_capacity(q.len() * 2 + 32);
    write!(
        out,
        "P5\n{} {}\n{}\n",
        img.width(),
        img.height(),
        depth.max_value() as u32
    )?;
    match depth {
        BitDepth::Eight => out.extend(q.iter().map(|&v| v as u8)),
        // P5 16-bit payloads are big-endian.
        BitDepth::Sixteen => {
            for v in &q {
                out.extend_from_slice(&v.to_be_bytes());
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn load_pgm(path: &Path) -> Result<Image> {
    let bytes = fs::read(path)?;
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(FsrError::format(format!("{}: not a P5 PGM file", path.display())));
    }
    // Header: three whitespace-separated tokens after the magic, with
    // '#' comment lines allowed.
    let mut pos = 2usize;
    let mut tokens = Vec::with_capacity(3);
    while tokens.len() < 3 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(FsrError::format(format!("{}: truncated PGM header", path.display())));
        }
        let tok = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| FsrError::format("PGM header is not ASCII"))?;
        tokens.push(
            tok.parse::<usize>()
                .map_err(|_| FsrError::format(format!("bad PGM header token '{tok}'")))?,
        );
    }
    // Exactly one whitespace byte separates the header from the payload.
    pos += 1;
    let (width, height, maxval) = (tokens[0], tokens[1], tokens[2]);
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(FsrError::format(format!("{}: corrupt PGM header", path.display())));
    }
    let n = width * height;
    let data: Vec<f64> = if maxval <= 255 {
        let payload = bytes
            .get(pos..pos + n)
            .ok_or_else(|| FsrError::format(format!("{}: PGM payload truncated", path.display())))?;
        payload.iter().map(|&v| v as f64).collect()
    } else {
        let payload = bytes
            .get(pos..pos + 2 * n)
            .ok_or_else(|| FsrError::format(format!("{}: PGM payload truncated", path.display())))?;
        payload
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
            .collect()
    };
    Image::new(height, width, data, maxval as f64)
}

// ---------------------------------------------------------------------------
// PNG via the image crate
// ---------------------------------------------------------------------------

fn write_png(img: &Image, path: &Path, depth: BitDepth) -> Result<()> {
    let q = quantize(img, depth);
    let (w, h) = (img.width() as u32, img.height() as u32);
    match depth {
        BitDepth::Eight => {
            let buf: Vec<u8> = q.iter().map(|&v| v as u8).collect();
            image::save_buffer(path, &buf, w, h, image::ExtendedColorType::L8)
        }
        BitDepth::Sixteen => {
            let mut buf = Vec::with_capacity(q.len() * 2);
            for v in &q {
                buf.extend_from_slice(&v.to_ne_bytes());
            }
            image::save_buffer(path, &buf, w, h, image::ExtendedColorType::L16)
        }
    }
    .map_err(|e| FsrError::format(format!("png encode failed: {e}")))
}

fn load_png(path: &Path) -> Result<LoadedImage> {
    let dynimg = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => FsrError::Io(io),
        other => FsrError::format(format!("{}: {other}", path.display())),
    })?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    match dynimg {
        image::DynamicImage::ImageLuma8(buf) => {
            let data = buf.into_raw().into_iter().map(|v| v as f64).collect();
            Ok(LoadedImage::Gray(Image::new(h, w, data, 255.0)?))
        }
        image::DynamicImage::ImageLuma16(buf) => {
            let data = buf.into_raw().into_iter().map(|v| v as f64).collect();
            Ok(LoadedImage::Gray(Image::new(h, w, data, 65535.0)?))
        }
        other => {
            let rgb = other.into_rgb16();
            // 8-bit sources arrive upscaled by 257; map back to native scale.
            let native_8bit = rgb.pixels().all(|p| p.0.iter().all(|&v| v % 257 == 0));
            let scale = if native_8bit { 255.0 } else { 65535.0 };
            let div = if native_8bit { 257.0 } else { 1.0 };
            let n = w * h;
            let mut r = Vec::with_capacity(n);
            let mut g = Vec::with_capacity(n);
            let mut b = Vec::with_capacity(n);
            for p in rgb.pixels() {
                r.push(p.0[0] as f64 / div);
                g.push(p.0[1] as f64 / div);
                b.push(p.0[2] as f64 / div);
            }
            Ok(LoadedImage::Rgb {
                r: Image::new(h, w, r, scale)?,
                g: Image::new(h, w, g, scale)?,
                b: Image::new(h, w, b, scale)?,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// FSR1 raw float format
// ---------------------------------------------------------------------------

const FSR1_MAGIC: &[u8; 4] = b"FSR1";

fn write_fsr1(img: &Image, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(16 + img.len() * 8);
    out.extend_from_slice(FSR1_MAGIC);
    out.extend_from_slice(&(img.height() as u32).to_le_bytes());
    out.extend_from_slice(&(img.width() as u32).to_le_bytes());
    out.extend_from_slice(&(img.value_scale() as f32).to_bits().to_le_bytes());
    for v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out)?;
    Ok(())
}

fn load_fsr1(path: &Path) -> Result<Image> {
    let bytes = fs::read(path)?;
    if bytes.len() < 16 || &bytes[..4] != FSR1_MAGIC {
        return Err(FsrError::format(format!("{}: not an FSR1 file", path.display())));
    }
    let h = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let w = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let reserved = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    let scale = if reserved == 0 { 255.0 } else { f32::from_bits(reserved) as f64 };
    let n = h.checked_mul(w).ok_or_else(|| FsrError::format("FSR1 header overflow"))?;
    let payload = bytes
        .get(16..16 + 8 * n)
        .ok_or_else(|| FsrError::format(format!("{}: FSR1 payload truncated", path.display())))?;
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Image::new(h, w, data, scale)
}
