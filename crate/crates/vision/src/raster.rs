//! 8-bit grayscale rasters: decoding PGM and PNG, encoding PNG and PGM.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat};

use crate::VisionError;

/// Rec. 601 luma of an 8-bit RGB triple.
pub fn luma_601(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    y.round().clamp(0.0, 255.0) as u8
}

fn to_gray(image: DynamicImage) -> GrayImage {
    match image {
        DynamicImage::ImageLuma8(gray) => gray,
        other => {
            let rgb = other.into_rgb8();
            let mut out = GrayImage::new(rgb.width(), rgb.height());
            for (dst, src) in out.pixels_mut().zip(rgb.pixels()) {
                dst.0[0] = luma_601(src.0[0], src.0[1], src.0[2]);
            }
            out
        }
    }
}

/// Decodes a PNG or binary/ASCII PGM into 8-bit gray; color becomes Rec. 601 luma.
pub fn decode_gray(bytes: &[u8]) -> Result<GrayImage, VisionError> {
    let format = if bytes.starts_with(b"\x89PNG") {
        ImageFormat::Png
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
        ImageFormat::Pnm
    } else {
        return Err(VisionError::ImageFormat(
            "expected a PNG or PGM (P5) raster".into(),
        ));
    };
    let image = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| VisionError::ImageFormat(e.to_string()))?;
    Ok(to_gray(image))
}

pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage, VisionError> {
    decode_gray(&std::fs::read(path)?)
}

pub fn encode_png(image: &GrayImage) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    image
        .write_to(&mut out, ImageFormat::Png)
        .expect("in-memory PNG encoding");
    out.into_inner()
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.as_raw());
    out
}

/// Writes PNG or PGM depending on the extension (`.pgm` or anything else).
pub fn save_gray(image: &GrayImage, path: impl AsRef<Path>) -> Result<(), VisionError> {
    let path = path.as_ref();
    let bytes = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("pgm") => encode_pgm(image),
        _ => encode_png(image),
    };
    std::fs::write(path, bytes)?;
    Ok(())
}
