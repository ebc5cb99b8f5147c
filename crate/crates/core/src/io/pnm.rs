//! Binary PPM (P6) and PGM (P5) with maxval 255.
//!
//! Floats quantize by round-half-up: `floor(clip(v) * 255 + 0.5)`, so a
//! write/read cycle never moves a value by more than 0.5/255.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Error;
use crate::raster::{ImageBuffer, OcclusionMask};
use crate::Result;

#[inline]
pub fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

pub fn write_ppm(img: &ImageBuffer, path: &Path) -> Result<()> {
    write_bytes(&ppm_bytes(img), path)
}

pub fn write_pgm(img: &ImageBuffer, path: &Path) -> Result<()> {
    assert_eq!(img.channels(), 1, "PGM is grayscale");
    write_bytes(&pnm_bytes(img, b"P5"), path)
}

/// Occlusion mask as PGM: 255 = occluded, 0 = visible.
pub fn write_pgm_mask(mask: &OcclusionMask, path: &Path) -> Result<()> {
    write_bytes(&pgm_mask_bytes(mask), path)
}

/// The exact bytes `write_ppm` would put on disk.
pub fn ppm_bytes(img: &ImageBuffer) -> Vec<u8> {
    assert_eq!(img.channels(), 3, "PPM is RGB");
    pnm_bytes(img, b"P6")
}

/// The exact bytes `write_pgm_mask` would put on disk.
pub fn pgm_mask_bytes(mask: &OcclusionMask) -> Vec<u8> {
    let mut bytes = header(b"P5", mask.width(), mask.height());
    bytes.extend(mask.data().iter().map(|&b| if b { 255u8 } else { 0 }));
    bytes
}

fn header(magic: &[u8], w: u32, h: u32) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(32 + (w as usize * h as usize * 3));
    bytes.extend_from_slice(magic);
    bytes.extend_from_slice(format!("\n{w} {h}\n255\n").as_bytes());
    bytes
}

fn pnm_bytes(img: &ImageBuffer, magic: &[u8]) -> Vec<u8> {
    let mut bytes = header(magic, img.width(), img.height());
    bytes.extend(img.data().iter().map(|&v| quantize(v)));
    bytes
}

fn write_bytes(bytes: &[u8], path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))
}

pub fn read_ppm(path: &Path) -> Result<ImageBuffer> {
    read_pnm(path, b"P6", 3)
}

pub fn read_pgm(path: &Path) -> Result<ImageBuffer> {
    read_pnm(path, b"P5", 1)
}

fn read_pnm(path: &Path, want_magic: &[u8], channels: u32) -> Result<ImageBuffer> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut pos = 0usize;
    let magic = next_field(&bytes, &mut pos)
        .ok_or_else(|| Error::BadHeader("empty file".into()))?;
    if magic.as_bytes() != want_magic {
        return Err(Error::BadHeader(format!(
            "expected {} magic, got `{magic}`",
            String::from_utf8_lossy(want_magic)
        )));
    }
    let w: usize = parse_field(&bytes, &mut pos, "width")?;
    let h: usize = parse_field(&bytes, &mut pos, "height")?;
    if w == 0 || h == 0 || w > 100_000 || h > 100_000 {
        return Err(Error::BadHeader(format!("unreasonable dimensions {w}x{h}")));
    }
    let maxval: usize = parse_field(&bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::BadHeader(format!("only maxval 255 supported, got {maxval}")));
    }
    let need = w * h * channels as usize;
    if bytes.len() < pos + need {
        return Err(Error::TruncatedFile(path.to_path_buf()));
    }
    let data = bytes[pos..pos + need]
        .iter()
        .map(|&b| b as f32 / 255.0)
        .collect();
    Ok(ImageBuffer::from_data(w as u32, h as u32, channels, data))
}

fn parse_field(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_field(bytes, pos)
        .ok_or_else(|| Error::BadHeader(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::BadHeader(format!("bad {what} `{tok}`")))
}

/// Next header field: whitespace-delimited, `#` comments skipped. Consumes
/// the single whitespace byte after the field.
fn next_field(bytes: &[u8], pos: &mut usize) -> Option<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return None;
    }
    let tok = String::from_utf8_lossy(&bytes[start..*pos]).into_owned();
    if *pos < bytes.len() {
        *pos += 1;
    }
    Some(tok)
}
