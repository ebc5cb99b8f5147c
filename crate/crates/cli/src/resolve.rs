//! Config assembly shared by the generating subcommands: preset or file,
//! `--set` overrides on top, seed override last, then one validation pass
//! and the provenance echo.

use anyhow::{anyhow, Context, Result};
use flowgen_core::{presets, GenConfig};

use crate::ConfigArgs;

pub fn resolve(args: &ConfigArgs) -> Result<GenConfig> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), None) => presets::find(name)
            .ok_or_else(|| anyhow!("unknown preset `{name}` (run `flowgen presets`)"))?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            GenConfig::from_text(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        (None, None) => GenConfig::default(),
        (Some(_), Some(_)) => unreachable!("clap rejects --preset with --config"),
    };
    for kv in &args.set {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--set wants KEY=VALUE, got `{kv}`"))?;
        cfg.apply_override(key, value)
            .with_context(|| format!("--set {kv}"))?;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The resolved canonical config and its hash, on standard error, before
/// any work begins.
pub fn echo(cfg: &GenConfig) {
    eprintln!("# config hash {}", cfg.hash());
    for line in cfg.to_text().lines() {
        eprintln!("#   {line}");
    }
}
