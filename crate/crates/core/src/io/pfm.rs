//! Grayscale PFM ("Pf") files for disparity interchange.
//!
//! Header: `Pf`, width and height, then a scale whose sign encodes byte
//! order (negative = little-endian, the variant written here). Pixel rows
//! are stored bottom-up as float32. Round-trips are bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Error;
use crate::raster::ImageBuffer;
use crate::Result;

pub fn write_pfm(img: &ImageBuffer, path: &Path) -> Result<()> {
    assert_eq!(img.channels(), 1, "PFM writer is grayscale-only");
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut bytes = Vec::with_capacity(32 + w * h * 4);
    bytes.extend_from_slice(format!("Pf\n{} {}\n-1.0\n", img.width(), img.height()).as_bytes());
    let data = img.data();
    for row in (0..h).rev() {
        for x in 0..w {
            bytes.extend_from_slice(&data[row * w + x].to_le_bytes());
        }
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn read_pfm(path: &Path) -> Result<ImageBuffer> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut pos = 0usize;
    let magic = next_token(&bytes, &mut pos)
        .ok_or_else(|| Error::BadHeader("empty file".into()))?;
    match magic.as_str() {
        "Pf" => {}
        "PF" => return Err(Error::BadHeader("color PFM not supported here".into())),
        other => return Err(Error::BadHeader(format!("unknown magic `{other}`"))),
    }
    let w: usize = parse_header_num(&bytes, &mut pos, "width")?;
    let h: usize = parse_header_num(&bytes, &mut pos, "height")?;
    if w == 0 || h == 0 || w > 100_000 || h > 100_000 {
        return Err(Error::BadHeader(format!("unreasonable dimensions {w}x{h}")));
    }
    let scale_tok = next_token(&bytes, &mut pos)
        .ok_or_else(|| Error::BadHeader("missing scale".into()))?;
    let scale: f64 = scale_tok
        .parse()
        .map_err(|_| Error::BadHeader(format!("bad scale `{scale_tok}`")))?;
    let little_endian = scale < 0.0;
    // Exactly one whitespace byte separates the header from the payload;
    // next_token has already consumed it.
    let need = w * h * 4;
    if bytes.len() < pos + need {
        return Err(Error::TruncatedFile(path.to_path_buf()));
    }
    let mut data = vec![0.0f32; w * h];
    for row in 0..h {
        let out_row = h - 1 - row; // stored bottom-up
        for x in 0..w {
            let off = pos + (row * w + x) * 4;
            let raw: [u8; 4] = bytes[off..off + 4].try_into().unwrap();
            data[out_row * w + x] = if little_endian {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
        }
    }
    Ok(ImageBuffer::from_data_unchecked(w as u32, h as u32, 1, data))
}

fn parse_header_num(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)
        .ok_or_else(|| Error::BadHeader(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::BadHeader(format!("bad {what} `{tok}`")))
}

/// Reads one whitespace-delimited ASCII token and consumes the single
/// whitespace byte after it.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<String> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
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
        *pos += 1; // the single separator byte
    }
    Some(tok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, uniform};

    #[test]
    fn constant_one_by_one_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pfm");
        let img = ImageBuffer::from_data(1, 1, 1, vec![1.0]);
        write_pfm(&img, &path).unwrap();
        assert_eq!(read_pfm(&path).unwrap(), img);
    }

    #[test]
    fn random_buffers_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = stream(4);
        for i in 0..20 {
            let w = 1 + (i * 11) % 40;
            let h = 1 + (i * 5) % 30;
            let data: Vec<f32> = (0..w * h)
                .map(|_| uniform(&mut rng, -500.0, 500.0) as f32)
                .collect();
            let img = ImageBuffer::from_data_unchecked(w as u32, h as u32, 1, data);
            let path = dir.path().join(format!("r{i}.pfm"));
            write_pfm(&img, &path).unwrap();
            assert_eq!(read_pfm(&path).unwrap().data(), img.data());
        }
    }

    #[test]
    fn color_pfm_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("color.pfm");
        std::fs::write(&path, b"PF\n1 1\n-1.0\n\0\0\0\0\0\0\0\0\0\0\0\0").unwrap();
        assert!(matches!(read_pfm(&path), Err(Error::BadHeader(_))));
    }

    #[test]
    fn truncation_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pfm");
        let img = ImageBuffer::from_data(4, 4, 1, vec![0.25; 16]);
        write_pfm(&img, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 2]).unwrap();
        assert!(matches!(read_pfm(&path), Err(Error::TruncatedFile(_))));
    }

    #[test]
    fn big_endian_payloads_are_readable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("be.pfm");
        let mut bytes = b"Pf\n2 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&0.5f32.to_be_bytes());
        bytes.extend_from_slice(&0.25f32.to_be_bytes());
        std::fs::write(&path, &bytes).unwrap();
        let img = read_pfm(&path).unwrap();
        assert_eq!(img.data(), &[0.5, 0.25]);
    }

    #[test]
    fn rows_are_stored_bottom_up() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.pfm");
        // 1x2 image: top value 0.1, bottom value 0.9.
        let img = ImageBuffer::from_data(1, 2, 1, vec![0.1, 0.9]);
        write_pfm(&img, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let payload = &bytes[bytes.len() - 8..];
        let first = f32::from_le_bytes(payload[0..4].try_into().unwrap());
        assert_eq!(first, 0.9, "file starts with the bottom row");
        assert_eq!(read_pfm(&path).unwrap(), img);
    }
}
