//! Read-only reporting: displacement statistics, endpoint-error evaluation,
//! and the preset catalog.

use std::collections::BTreeSet;
use std::io::Write;

use anyhow::{anyhow, ensure, Context, Result};

use flowgen_core::analysis::{log_spaced_edges, DisplacementHistogram, EpeAccumulator, DEFAULT_RANGES};
use flowgen_core::io::{list_flow_files, read_flo};
use flowgen_core::presets;
use flowgen_core::Error;

use crate::{EvalArgs, StatsArgs};

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

/// CSV schema: header `bin_lo,bin_hi,count,share`, then one underflow row
/// (`0` up to the first edge) and one row per bin — `bins + 1` data rows.
pub fn stats(args: StatsArgs) -> Result<()> {
    ensure!(args.bins >= 1, "--bins must be at least 1");
    ensure!(
        args.min > 0.0 && args.max > args.min,
        "need 0 < --min < --max"
    );
    eprintln!(
        "# stats over {} (bins = {}, range = {}..{})",
        args.input.display(),
        args.bins,
        args.min,
        args.max
    );
    let mut hist = DisplacementHistogram::new(log_spaced_edges(args.min, args.max, args.bins));
    let files = list_flow_files(&args.input)?;
    let total = files.len();
    for (n, (_, path)) in files.into_iter().enumerate() {
        let flow = read_flo(&path)?;
        hist.accumulate(&flow);
        eprintln!("[{}/{total}] {}", n + 1, path.display());
    }

    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    writeln!(out, "bin_lo,bin_hi,count,share")?;
    let edges = hist.bin_edges();
    let shares = hist.shares();
    for (i, (&count, &share)) in hist.counts().iter().zip(&shares).enumerate() {
        let lo = if i == 0 { 0.0 } else { edges[i - 1] };
        let hi = edges[i.min(edges.len() - 1)];
        writeln!(out, "{lo},{hi},{count},{share}")?;
    }
    out.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

pub fn eval(args: EvalArgs) -> Result<()> {
    let ranges = match &args.ranges {
        None => DEFAULT_RANGES.to_vec(),
        Some(text) => parse_ranges(text)?,
    };
    eprintln!(
        "# eval {} against {} over {} ranges",
        args.est.display(),
        args.gt.display(),
        ranges.len()
    );

    let est = list_flow_files(&args.est)?;
    let gt = list_flow_files(&args.gt)?;
    let est_set: BTreeSet<u64> = est.iter().map(|(i, _)| *i).collect();
    let gt_set: BTreeSet<u64> = gt.iter().map(|(i, _)| *i).collect();
    if est_set != gt_set {
        let missing = est_set.symmetric_difference(&gt_set).copied().collect();
        return Err(Error::SampleMismatch { missing }.into());
    }

    let mut acc = EpeAccumulator::new(&ranges);
    let total = gt.len();
    for (n, ((index, est_path), (_, gt_path))) in est.iter().zip(&gt).enumerate() {
        let est_flow = read_flo(est_path)?;
        let gt_flow = read_flo(gt_path)?;
        acc.add(&est_flow, &gt_flow)
            .with_context(|| format!("sample {index}"))?;
        eprintln!("[{}/{total}] sample {index}", n + 1);
    }
    let report = acc.report();

    println!("samples = {total}");
    println!("pixels = {}", report.pixel_count);
    println!("total_epe = {}", report.total_epe);
    for part in &report.partial {
        println!(
            "partial {}..{} = {} ({} px)",
            part.range.0, part.range.1, part.contribution, part.pixels
        );
    }

    if let Some(path) = &args.csv {
        let mut csv = String::from("kind,lo,hi,value,pixels\n");
        for part in &report.partial {
            csv.push_str(&format!(
                "partial,{},{},{},{}\n",
                part.range.0, part.range.1, part.contribution, part.pixels
            ));
        }
        csv.push_str(&format!(
            "total,,,{},{}\n",
            report.total_epe, report.pixel_count
        ));
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// `0,10,40,160` becomes half-open ranges between consecutive edges plus an
/// open-ended final range.
fn parse_ranges(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut edges = Vec::new();
    for part in text.split(',') {
        let e: f64 = part
            .trim()
            .parse()
            .map_err(|_| anyhow!("bad range edge `{part}`"))?;
        edges.push(e);
    }
    ensure!(
        edges.windows(2).all(|w| w[0] < w[1]),
        "range edges must be strictly increasing"
    );
    ensure!(!edges.is_empty(), "need at least one range edge");
    let mut ranges: Vec<(f64, f64)> =
        edges.windows(2).map(|w| (w[0], w[1])).collect();
    ranges.push((*edges.last().unwrap(), f64::INFINITY));
    Ok(ranges)
}

// ---------------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------------

pub fn presets() -> Result<()> {
    for preset in presets::catalog() {
        println!("{:<22} {}", preset.name, preset.summary);
    }
    Ok(())
}
