//! Reproducibility manifest written next to every generated dataset.
//!
//! The manifest embeds the full canonical config text, the tool version,
//! and the seed-derivation rule id — enough to regenerate every sample
//! bit-exactly with the same tool version. The creation timestamp is
//! opt-in so that repeated runs produce byte-identical trees by default.

use std::fs;
use std::path::Path;

use crate::config::GenConfig;
use crate::error::Error;
use crate::rng::SEED_RULE;
use crate::Result;

pub const MANIFEST_FILE: &str = "manifest.txt";
const MAGIC_LINE: &str = "flowgen-manifest 1";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    /// Canonical GenConfig text, verbatim.
    pub config_text: String,
    pub tool_version: String,
    pub master_seed: u64,
    /// Number of samples, or `None` for streaming (unbounded) datasets.
    pub count: Option<u64>,
    /// Identifier of the per-sample seed derivation rule.
    pub seed_rule: String,
    /// Optional creation time (any caller-formatted string). Off by
    /// default: omitting it keeps regenerated trees byte-identical.
    pub timestamp: Option<String>,
}

impl DatasetManifest {
    pub fn new(config: &GenConfig, count: Option<u64>) -> DatasetManifest {
        DatasetManifest {
            config_text: config.to_text(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.master_seed,
            count,
            seed_rule: SEED_RULE.to_string(),
            timestamp: None,
        }
    }

    pub fn with_timestamp(mut self, ts: String) -> DatasetManifest {
        self.timestamp = Some(ts);
        self
    }

    pub fn config(&self) -> Result<GenConfig> {
        GenConfig::from_text(&self.config_text)
    }

    pub fn to_text(&self) -> String {
        let hash = {
            use sha2::{Digest, Sha256};
            let digest = Sha256::digest(self.config_text.as_bytes());
            digest.iter().map(|b| format!("{b:02x}")).collect::<String>()
        };
        let mut out = String::new();
        out.push_str(MAGIC_LINE);
        out.push('\n');
        out.push_str(&format!("config_hash = {hash}\n"));
        out.push_str(&format!(
            "count = {}\n",
            match self.count {
                Some(n) => n.to_string(),
                None => "streaming".to_string(),
            }
        ));
        out.push_str(&format!("master_seed = {}\n", self.master_seed));
        out.push_str(&format!("seed_rule = {}\n", self.seed_rule));
        if let Some(ts) = &self.timestamp {
            out.push_str(&format!("timestamp = {ts}\n"));
        }
        out.push_str(&format!("tool_version = {}\n", self.tool_version));
        out.push('\n');
        out.push_str(&self.config_text);
        out
    }

    pub fn from_text(text: &str) -> Result<DatasetManifest> {
        let bad = |line: usize, reason: String| Error::BadConfig { line, reason };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l == MAGIC_LINE => {}
            _ => return Err(bad(1, format!("expected `{MAGIC_LINE}`"))),
        }
        let mut config_hash = None;
        let mut count = None;
        let mut master_seed = None;
        let mut seed_rule = None;
        let mut timestamp = None;
        let mut tool_version = None;
        let mut config_start = None;
        for (i, line) in &mut lines {
            if line.trim().is_empty() {
                config_start = Some(i + 1);
                break;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(bad(i + 1, "expected `key = value`".into()));
            };
            let (k, v) = (k.trim(), v.trim());
            match k {
                "config_hash" => config_hash = Some(v.to_string()),
                "count" => {
                    count = Some(if v == "streaming" {
                        None
                    } else {
                        Some(v.parse::<u64>().map_err(|_| {
                            bad(i + 1, format!("bad count `{v}`"))
                        })?)
                    })
                }
                "master_seed" => {
                    master_seed = Some(v.parse::<u64>().map_err(|_| {
                        bad(i + 1, format!("bad master_seed `{v}`"))
                    })?)
                }
                "seed_rule" => seed_rule = Some(v.to_string()),
                "timestamp" => timestamp = Some(v.to_string()),
                "tool_version" => tool_version = Some(v.to_string()),
                other => return Err(bad(i + 1, format!("unknown manifest key `{other}`"))),
            }
        }
        let config_start =
            config_start.ok_or_else(|| bad(0, "missing config section".into()))?;
        let config_text: String = text
            .lines()
            .skip(config_start)
            .map(|l| format!("{l}\n"))
            .collect();
        let manifest = DatasetManifest {
            config_text,
            tool_version: tool_version.ok_or_else(|| bad(0, "missing tool_version".into()))?,
            master_seed: master_seed.ok_or_else(|| bad(0, "missing master_seed".into()))?,
            count: count.ok_or_else(|| bad(0, "missing count".into()))?,
            seed_rule: seed_rule.ok_or_else(|| bad(0, "missing seed_rule".into()))?,
            timestamp,
        };
        // The embedded hash must match the embedded config.
        let expect = config_hash.ok_or_else(|| bad(0, "missing config_hash".into()))?;
        let got = manifest.config()?.hash();
        if got != expect {
            return Err(bad(0, format!("config hash mismatch: header says {expect}, config hashes to {got}")));
        }
        Ok(manifest)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(dir: &Path) -> Result<DatasetManifest> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips() {
        let cfg = GenConfig::default();
        let m = DatasetManifest::new(&cfg, Some(50));
        let back = DatasetManifest::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.config().unwrap(), cfg);
    }

    #[test]
    fn streaming_count_round_trips() {
        let m = DatasetManifest::new(&GenConfig::default(), None);
        let back = DatasetManifest::from_text(&m.to_text()).unwrap();
        assert_eq!(back.count, None);
    }

    #[test]
    fn timestamp_is_opt_in() {
        let cfg = GenConfig::default();
        let bare = DatasetManifest::new(&cfg, Some(1));
        assert!(!bare.to_text().contains("timestamp"));
        let stamped = bare.clone().with_timestamp("1724025600".into());
        assert!(stamped.to_text().contains("timestamp = 1724025600"));
        assert_eq!(
            DatasetManifest::from_text(&stamped.to_text()).unwrap(),
            stamped
        );
    }

    #[test]
    fn tampered_config_is_detected() {
        let m = DatasetManifest::new(&GenConfig::default(), Some(5));
        let text = m.to_text().replace("master_seed = 1", "master_seed = 2");
        assert!(DatasetManifest::from_text(&text).is_err());
    }

    #[test]
    fn write_read_cycle() {
        let dir = tempfile::tempdir().unwrap();
        let m = DatasetManifest::new(&GenConfig::default(), Some(3));
        m.write(dir.path()).unwrap();
        assert_eq!(DatasetManifest::read(dir.path()).unwrap(), m);
    }
}
