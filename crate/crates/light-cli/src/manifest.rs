//! Run manifests: one JSON line per run appended to `manifest.jsonl` in the
//! output directory. A manifest carries the fully resolved configuration and
//! seeds, so a run is reproducible from its manifest alone.

use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub toolkit_version: String,
    pub base_seed: u64,
    pub scale: String,
    /// Every decided default inlined, keyed `section -> key -> value`.
    pub resolved_config: BTreeMap<String, BTreeMap<String, String>>,
    pub seeds: Vec<u64>,
    /// Paths of every artifact the run emitted, relative to the output
    /// directory.
    pub artifacts: Vec<String>,
    pub failures: Vec<String>,
    pub wall_ms: u64,
}

impl RunManifest {
    pub fn new(experiment: &str, base_seed: u64, scale: &str) -> Self {
        RunManifest {
            experiment: experiment.to_string(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            base_seed,
            scale: scale.to_string(),
            resolved_config: BTreeMap::new(),
            seeds: Vec::new(),
            artifacts: Vec::new(),
            failures: Vec::new(),
            wall_ms: 0,
        }
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl ToString) {
        self.resolved_config
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.to_string());
    }

    pub fn add_artifact(&mut self, path: &str) {
        self.artifacts.push(path.to_string());
    }
}

/// Append the manifest as one JSON line; returns the manifest file path.
pub fn append_manifest(out_dir: &Path, manifest: &RunManifest) -> std::io::Result<PathBuf> {
    let path = out_dir.join("manifest.jsonl");
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)?;
    let line = serde_json::to_string(manifest).expect("manifest serializes");
    writeln!(f, "{line}")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_appends_lines() {
        let dir = std::env::temp_dir().join(format!("light-manifest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut m = RunManifest::new("demo", 7, "desk");
        m.set("s", "k", 1.5);
        m.add_artifact("a.csv");
        append_manifest(&dir, &m).unwrap();
        append_manifest(&dir, &m).unwrap();
        let text = std::fs::read_to_string(dir.join("manifest.jsonl")).unwrap();
        assert_eq!(text.lines().count(), 2);
        let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(v["experiment"], "demo");
        assert_eq!(v["resolved_config"]["s"]["k"], "1.5");
        std::fs::remove_dir_all(dir).ok();
    }
}
