//! Run manifests: what was run, from which configuration, producing which
//! files, with which verdicts.
//!
//! The manifest records the SHA-256 of the canonical configuration (so it is
//! stable under reformatting of the config file) and of every output file, and
//! is written atomically (temporary file + rename) once the run is finished.
//! [`check_manifest`] re-hashes the outputs and, optionally, a configuration.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::RunConfig;
use crate::error::{LabError, Result};
use crate::report::{EstimateReport, Status};

/// File name of the manifest inside an output directory.
pub const MANIFEST_FILE: &str = "manifest.json";

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of a configuration's canonical JSON.
pub fn config_hash(cfg: &RunConfig) -> String {
    sha256_hex(cfg.canonical_json().as_bytes())
}

/// Milliseconds since the Unix epoch.
pub fn now_unix_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// One output file, relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: String,
    /// Hex SHA-256 of the contents.
    pub sha256: String,
}

/// One criterion outcome as recorded in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionRecord {
    /// Estimate or experiment id.
    pub estimate: String,
    /// Criterion name.
    pub criterion: String,
    /// Outcome.
    pub status: Status,
    /// Measured value.
    pub measured: f64,
    /// Tolerance statement.
    pub requirement: String,
}

/// Record of one finished run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the canonical configuration.
    pub config_hash: String,
    /// The canonical configuration itself.
    pub config: serde_json::Value,
    /// Version of the tool that produced the run.
    pub tool_version: String,
    /// Subcommand (`verify bilinear-l2`, `campaign`, `simulate`, …).
    pub subcommand: String,
    /// Start time (ms since the Unix epoch).
    pub started_unix_ms: u64,
    /// End time (ms since the Unix epoch).
    pub finished_unix_ms: u64,
    /// Output files with their hashes.
    pub outputs: Vec<OutputFile>,
    /// Per-criterion outcomes.
    pub criteria: Vec<CriterionRecord>,
    /// Worst criterion outcome.
    pub status: Status,
}

impl RunManifest {
    /// Start a manifest for `subcommand` run from `cfg`.
    pub fn begin(cfg: &RunConfig, subcommand: impl Into<String>) -> Self {
        RunManifest {
            config_hash: config_hash(cfg),
            config: serde_json::to_value(cfg).expect("configuration serialises"),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.into(),
            started_unix_ms: now_unix_ms(),
            finished_unix_ms: 0,
            outputs: Vec::new(),
            criteria: Vec::new(),
            status: Status::Pass,
        }
    }

    /// Record the verdicts of a report.
    pub fn add_report(&mut self, report: &EstimateReport) {
        for v in &report.verdicts {
            self.add_criterion(&report.estimate, &v.criterion, v.status, v.measured, &v.requirement);
        }
    }

    /// Record one criterion.
    pub fn add_criterion(&mut self, estimate: &str, criterion: &str, status: Status, measured: f64, requirement: &str) {
        self.status = self.status.worst(status);
        self.criteria.push(CriterionRecord {
            estimate: estimate.to_string(),
            criterion: criterion.to_string(),
            status,
            measured: if measured.is_finite() { measured } else { 0.0 },
            requirement: requirement.to_string(),
        });
    }

    /// Hash an output file in `dir` and record it.
    pub fn add_output(&mut self, dir: &Path, relative: &str) -> Result<()> {
        let bytes = std::fs::read(dir.join(relative))?;
        self.outputs.push(OutputFile { path: relative.to_string(), sha256: sha256_hex(&bytes) });
        Ok(())
    }

    /// Stamp the end time and write `dir/manifest.json` atomically.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        self.finished_unix_ms = now_unix_ms();
        let path = dir.join(MANIFEST_FILE);
        write_atomic(&path, serde_json::to_string_pretty(&self)?.as_bytes())?;
        Ok(path)
    }

    /// Read a manifest.
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Write a file atomically: write a sibling temporary file, then rename it over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| LabError::Format(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// One discrepancy found by [`check_manifest`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ManifestIssue {
    /// The stored configuration does not hash to the stored hash.
    ConfigHashMismatch {
        /// Hash in the manifest.
        recorded: String,
        /// Hash recomputed.
        actual: String,
    },
    /// An output file is missing.
    MissingOutput(String),
    /// An output file's contents changed.
    OutputChanged(String),
}

impl std::fmt::Display for ManifestIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ManifestIssue::ConfigHashMismatch { recorded, actual } => write!(f, "config hash mismatch: recorded {recorded}, actual {actual}"),
            ManifestIssue::MissingOutput(p) => write!(f, "missing output {p}"),
            ManifestIssue::OutputChanged(p) => write!(f, "output {p} changed since the run"),
        }
    }
}

/// Verify a manifest: its stored configuration must hash to the recorded
/// hash (and so must `config`, if given), and every output must exist in
/// the manifest's directory with unchanged contents.
pub fn check_manifest(path: &Path, config: Option<&RunConfig>) -> Result<Vec<ManifestIssue>> {
    let m = RunManifest::load(path)?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut issues = Vec::new();
    let stored: RunConfig = serde_json::from_value(m.config.clone())?;
    let mut candidates = vec![config_hash(&stored)];
    if let Some(c) = config {
        candidates.push(config_hash(c));
    }
    for actual in candidates {
        if actual != m.config_hash {
            issues.push(ManifestIssue::ConfigHashMismatch { recorded: m.config_hash.clone(), actual });
        }
    }
    for out in &m.outputs {
        match std::fs::read(dir.join(&out.path)) {
            Ok(bytes) if sha256_hex(&bytes) == out.sha256 => {}
            Ok(_) => issues.push(ManifestIssue::OutputChanged(out.path.clone())),
            Err(_) => issues.push(ManifestIssue::MissingOutput(out.path.clone())),
        }
    }
    Ok(issues)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_matches_the_standard_vector() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn manifest_round_trip_and_check() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { seed: Some(9), ..Default::default() };
        std::fs::write(dir.path().join("a.csv"), "x\n1\n").unwrap();
        let mut m = RunManifest::begin(&cfg, "verify vp");
        m.add_output(dir.path(), "a.csv").unwrap();
        m.add_criterion("vp", "dp-equals-enumeration", Status::Pass, 0.0, "0 mismatches");
        m.add_criterion("vp", "other", Status::Unresolved, f64::NAN, "-");
        assert_eq!(m.status, Status::Unresolved);
        let path = m.finish(dir.path()).unwrap();
        let back = RunManifest::load(&path).unwrap();
        assert_eq!(back.criteria.len(), 2);
        assert!(check_manifest(&path, Some(&cfg)).unwrap().is_empty());

        let other = RunConfig { seed: Some(10), ..Default::default() };
        assert_eq!(check_manifest(&path, Some(&other)).unwrap().len(), 1);
        std::fs::write(dir.path().join("a.csv"), "x\n2\n").unwrap();
        assert_eq!(check_manifest(&path, None).unwrap(), vec![ManifestIssue::OutputChanged("a.csv".into())]);
        std::fs::remove_file(dir.path().join("a.csv")).unwrap();
        assert_eq!(check_manifest(&path, None).unwrap(), vec![ManifestIssue::MissingOutput("a.csv".into())]);
    }
}
