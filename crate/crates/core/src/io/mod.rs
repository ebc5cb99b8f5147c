//! Bit-exact persistence: flow files, images, dataset layout, manifest.
//!
//! A dataset directory holds `manifest.txt` plus four files per sample,
//! keyed by a zero-padded six-digit index:
//!
//! ```text
//! NNNNNN_img1.ppm   first frame, binary PPM, maxval 255
//! NNNNNN_img2.ppm   second frame
//! NNNNNN_flow.flo   ground-truth flow
//! NNNNNN_occ.pgm    occlusion mask, 255 = occluded (optional extra)
//! ```

pub mod flo;
pub mod manifest;
pub mod pfm;
pub mod pnm;

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::raster::{OcclusionMask, Sample};
use crate::Result;

pub use flo::{flo_bytes, read_flo, write_flo};
pub use manifest::{DatasetManifest, MANIFEST_FILE};
pub use pfm::{read_pfm, write_pfm};
pub use pnm::{pgm_mask_bytes, ppm_bytes, read_pgm, read_ppm, write_pgm, write_pgm_mask, write_ppm};

/// Zero-padded six-digit sample prefix (wider indices keep their digits).
pub fn sample_prefix(index: u64) -> String {
    format!("{index:06}")
}

/// The four per-sample file names.
pub fn sample_files(index: u64) -> [String; 4] {
    let p = sample_prefix(index);
    [
        format!("{p}_img1.ppm"),
        format!("{p}_img2.ppm"),
        format!("{p}_flow.flo"),
        format!("{p}_occ.pgm"),
    ]
}

/// Writes one sample into `dir` (created if absent). Overwrites are
/// idempotent: the same sample always produces the same bytes.
pub fn write_sample(dir: &Path, index: u64, sample: &Sample) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let [img1, img2, flow, occ] = sample_files(index);
    pnm::write_ppm(&sample.frame1, &dir.join(img1))?;
    pnm::write_ppm(&sample.frame2, &dir.join(img2))?;
    flo::write_flo(&sample.flow, &dir.join(flow))?;
    pnm::write_pgm_mask(&sample.occ, &dir.join(occ))
}

/// True when all four files of the sample are present.
pub fn sample_exists(dir: &Path, index: u64) -> bool {
    sample_files(index).iter().all(|f| dir.join(f).is_file())
}

/// Reads a sample back (frames dequantized to floats).
pub fn read_sample(dir: &Path, index: u64) -> Result<Sample> {
    let [img1, img2, flow, occ] = sample_files(index);
    let frame1 = pnm::read_ppm(&dir.join(img1))?;
    let frame2 = pnm::read_ppm(&dir.join(img2))?;
    let flow = flo::read_flo(&dir.join(flow))?;
    let occ_img = pnm::read_pgm(&dir.join(occ))?;
    let data = occ_img.data().iter().map(|&v| v > 0.5).collect();
    let occ = OcclusionMask::from_data(occ_img.width(), occ_img.height(), data);
    Ok(Sample { frame1, frame2, flow, occ })
}

/// All `*_flow.flo` files under `dir`, sorted by sample index. Errors with
/// [`Error::NoFlowFiles`] when none are found.
pub fn list_flow_files(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out: Vec<(u64, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some(prefix) = name.strip_suffix("_flow.flo") else { continue };
        if prefix.is_empty() || !prefix.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        let Ok(index) = prefix.parse::<u64>() else { continue };
        out.push((index, entry.path()));
    }
    if out.is_empty() {
        return Err(Error::NoFlowFiles(dir.to_path_buf()));
    }
    out.sort_by_key(|(i, _)| *i);
    Ok(out)
}
