//! Dataset-to-dataset passes: augmentation and camera degradation.

use std::path::Path;

use anyhow::{ensure, Context, Result};

use flowgen_core::augment::{augment_sample, augment_stream};
use flowgen_core::degrade::apply_profile;
use flowgen_core::io::{self, DatasetManifest, MANIFEST_FILE};

use crate::{resolve, ToolArgs};

pub fn augment(args: ToolArgs) -> Result<()> {
    let cfg = resolve::resolve(&args.config)?;
    resolve::echo(&cfg);
    ensure!(
        cfg.augment_mode.any(),
        "all augmentation switches are off; set aug.* keys or pick an aug-* preset"
    );
    let indices = complete_samples(&args.input)?;
    prepare_out(&args.out, &cfg, indices.len() as u64)?;
    let total = indices.len();
    for (n, index) in indices.into_iter().enumerate() {
        let sample = io::read_sample(&args.input, index)?;
        let mut rng = augment_stream(cfg.master_seed, index);
        let out = augment_sample(&sample, cfg.augment_mode, &cfg.augment, &mut rng)?;
        io::write_sample(&args.out, index, &out.sample)?;
        eprintln!("[{}/{total}] sample {} augmented", n + 1, io::sample_prefix(index));
    }
    Ok(())
}

pub fn degrade(args: ToolArgs) -> Result<()> {
    let cfg = resolve::resolve(&args.config)?;
    resolve::echo(&cfg);
    let profile = cfg.camera;
    if profile.is_identity() {
        eprintln!("note: identity camera profile; output will equal input");
    }
    let indices = complete_samples(&args.input)?;
    prepare_out(&args.out, &cfg, indices.len() as u64)?;
    let total = indices.len();
    for (n, index) in indices.into_iter().enumerate() {
        let sample = io::read_sample(&args.input, index)?;
        let out = apply_profile(&sample, &profile);
        io::write_sample(&args.out, index, &out)?;
        eprintln!("[{}/{total}] sample {} degraded", n + 1, io::sample_prefix(index));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

/// Indices whose four sample files are all present.
fn complete_samples(dir: &Path) -> Result<Vec<u64>> {
    let mut indices = Vec::new();
    for (index, _) in io::list_flow_files(dir)? {
        ensure!(
            io::sample_exists(dir, index),
            "sample {} in {} is incomplete",
            io::sample_prefix(index),
            dir.display()
        );
        indices.push(index);
    }
    Ok(indices)
}

fn prepare_out(out: &Path, cfg: &flowgen_core::GenConfig, count: u64) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let manifest = DatasetManifest::new(cfg, Some(count));
    std::fs::write(out.join(MANIFEST_FILE), manifest.to_text())
        .with_context(|| format!("writing {}", out.join(MANIFEST_FILE).display()))
}
