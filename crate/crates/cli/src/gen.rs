//! Batch and streaming sample generation.

use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;

use flowgen_core::io::{self, DatasetManifest, MANIFEST_FILE};
use flowgen_core::textures::TextureSource;
use flowgen_core::{generate_sample, GenConfig};

use crate::{resolve, CountArg, GenArgs};

pub fn run(args: GenArgs) -> Result<()> {
    let cfg = resolve::resolve(&args.config)?;
    resolve::echo(&cfg);
    let source = match &args.textures {
        Some(dir) => TextureSource::from_dir(dir)?,
        None => TextureSource::procedural_only(),
    };
    let (lo, hi) = match (args.count, args.range) {
        (Some(CountArg::Finite(n)), None) => (0, Some(n)),
        (Some(CountArg::Infinite), None) => {
            ensure!(args.stream, "--count infinite requires --stream");
            (0, None)
        }
        (None, Some(r)) => (r.lo, Some(r.hi)),
        (None, None) => bail!("pass --count N or --range LO..HI"),
        (Some(_), Some(_)) => unreachable!("clap rejects --count with --range"),
    };
    if args.stream {
        stream(&cfg, &source, lo, hi)
    } else {
        let hi = hi.expect("infinite count requires --stream");
        let out = args.out.as_deref().expect("clap requires --out without --stream");
        batch(&cfg, &source, lo, hi, out, &args)
    }
}

// ---------------------------------------------------------------------------
// Batch mode
// ---------------------------------------------------------------------------

fn batch(
    cfg: &GenConfig,
    source: &TextureSource,
    lo: u64,
    hi: u64,
    out: &Path,
    args: &GenArgs,
) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut manifest = DatasetManifest::new(cfg, Some(hi));
    if let Some(ts) = &args.timestamp {
        manifest = manifest.with_timestamp(ts.clone());
    }
    guard_manifest(out, &manifest, args.overwrite)?;
    std::fs::write(out.join(MANIFEST_FILE), manifest.to_text())
        .with_context(|| format!("writing {}", out.join(MANIFEST_FILE).display()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .context("building worker pool")?;
    let total = hi - lo;
    let done = AtomicU64::new(0);
    pool.install(|| {
        (lo..hi).into_par_iter().try_for_each(|index| -> Result<()> {
            let prefix = io::sample_prefix(index);
            if !args.overwrite && io::sample_exists(out, index) {
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                eprintln!("[{n}/{total}] sample {prefix} kept");
                return Ok(());
            }
            let sample = generate_sample(cfg, source, index)
                .with_context(|| format!("sample {prefix}"))?;
            io::write_sample(out, index, &sample)?;
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!("[{n}/{total}] sample {prefix} written");
            Ok(())
        })
    })
}

/// Refuses to resume into a directory generated under a different config,
/// unless `--overwrite` replaces it wholesale.
fn guard_manifest(out: &Path, fresh: &DatasetManifest, overwrite: bool) -> Result<()> {
    let path = out.join(MANIFEST_FILE);
    if overwrite || !path.exists() {
        return Ok(());
    }
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    let old = DatasetManifest::from_text(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    ensure!(
        old.config_text == fresh.config_text,
        "{} was generated with a different config; use a fresh directory or --overwrite",
        out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Streaming mode
// ---------------------------------------------------------------------------

/// Frame format: a `FLOWSTREAM 1` line, then per sample four parts, each a
/// `part <filename> <byte count>` line followed by exactly that many raw
/// bytes — the same bytes batch mode puts in the named file.
fn stream(cfg: &GenConfig, source: &TextureSource, lo: u64, hi: Option<u64>) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    out.write_all(b"FLOWSTREAM 1\n")?;
    let mut index = lo;
    while hi.map_or(true, |hi| index < hi) {
        let sample = generate_sample(cfg, source, index)?;
        let [img1, img2, flow, occ] = io::sample_files(index);
        let parts = [
            (img1, io::ppm_bytes(&sample.frame1)),
            (img2, io::ppm_bytes(&sample.frame2)),
            (flow, io::flo_bytes(&sample.flow)),
            (occ, io::pgm_mask_bytes(&sample.occ)),
        ];
        for (name, bytes) in &parts {
            writeln!(out, "part {name} {}", bytes.len())?;
            out.write_all(bytes)?;
        }
        // Flush per sample so a live consumer sees whole samples promptly.
        out.flush()?;
        eprintln!("streamed sample {}", io::sample_prefix(index));
        index += 1;
    }
    Ok(())
}
