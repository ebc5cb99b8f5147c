//! Flow-field files: 4-byte magic float 202021.25, little-endian int32
//! width and height, then row-major interleaved little-endian float32
//! (u, v) pairs. Round-trips are bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Error;
use crate::raster::FlowField;
use crate::Result;

pub const FLO_MAGIC: f32 = 202021.25;

/// Sanity cap on declared dimensions.
pub const MAX_DIM: i32 = 100_000;

pub fn write_flo(flow: &FlowField, path: &Path) -> Result<()> {
    let bytes = flo_bytes(flow);
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// The exact bytes `write_flo` would put on disk.
pub fn flo_bytes(flow: &FlowField) -> Vec<u8> {
    let w = flow.width() as usize;
    let h = flow.height() as usize;
    let mut bytes = Vec::with_capacity(12 + w * h * 8);
    bytes.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    bytes.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    bytes.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    let (u, v) = (flow.u_plane(), flow.v_plane());
    for i in 0..w * h {
        bytes.extend_from_slice(&u[i].to_le_bytes());
        bytes.extend_from_slice(&v[i].to_le_bytes());
    }
    bytes
}

pub fn read_flo(path: &Path) -> Result<FlowField> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 12 {
        return Err(Error::TruncatedFile(path.to_path_buf()));
    }
    let magic = f32::from_le_bytes(bytes[0..4].try_into().unwrap());
    if magic != FLO_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width <= 0 || height <= 0 || width > MAX_DIM || height > MAX_DIM {
        return Err(Error::DimensionOverflow { width, height });
    }
    let n = width as usize * height as usize;
    let need = 12 + n * 8;
    if bytes.len() < need {
        return Err(Error::TruncatedFile(path.to_path_buf()));
    }
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut off = 12;
    for _ in 0..n {
        u.push(f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()));
        v.push(f32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap()));
        off += 8;
    }
    Ok(FlowField::from_planes(width as u32, height as u32, u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, uniform};

    fn random_flow(rng: &mut rand_chacha::ChaCha8Rng, w: u32, h: u32) -> FlowField {
        let mut f = FlowField::new(w, h);
        for y in 0..h {
            for x in 0..w {
                f.set(
                    x,
                    y,
                    uniform(rng, -200.0, 200.0) as f32,
                    uniform(rng, -200.0, 200.0) as f32,
                );
            }
        }
        f
    }

    #[test]
    fn minimal_field_is_twenty_bytes_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.flo");
        let f = FlowField::new(1, 1);
        write_flo(&f, &path).unwrap();
        // Magic + width + height + one (u, v) pair of f32s.
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 20);
        assert_eq!(read_flo(&path).unwrap(), f);
    }

    #[test]
    fn random_fields_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = stream(1);
        for i in 0u32..20 {
            let w = 1 + (i * 13) % 70;
            let h = 1 + (i * 7) % 50;
            let f = random_flow(&mut rng, w, h);
            let path = dir.path().join(format!("rt{i}.flo"));
            write_flo(&f, &path).unwrap();
            let back = read_flo(&path).unwrap();
            assert_eq!(back.u_plane(), f.u_plane());
            assert_eq!(back.v_plane(), f.v_plane());
        }
    }

    #[test]
    fn zero_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.flo");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&0.0f32.to_le_bytes());
        bytes.extend_from_slice(&1i32.to_le_bytes());
        bytes.extend_from_slice(&1i32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 8]);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_flo(&path), Err(Error::BadMagic(m)) if m == 0.0));
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.flo");
        let f = random_flow(&mut stream(2), 8, 8);
        write_flo(&f, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(read_flo(&path), Err(Error::TruncatedFile(_))));
    }

    #[test]
    fn absurd_dimensions_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("huge.flo");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&FLO_MAGIC.to_le_bytes());
        bytes.extend_from_slice(&2_000_000i32.to_le_bytes());
        bytes.extend_from_slice(&2i32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_flo(&path),
            Err(Error::DimensionOverflow { .. })
        ));
    }
}
