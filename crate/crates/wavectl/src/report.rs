//! Per-run report written next to the artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the configuration (or input) bytes, hex.
    pub config_sha256: String,
    pub elapsed_seconds: f64,
    pub manifest: Vec<ManifestEntry>,
    pub warnings: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects outputs and warnings while a command runs.
#[derive(Debug)]
pub struct Recorder {
    command: String,
    config_sha256: String,
    started: Instant,
    out_dir: PathBuf,
    files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl Recorder {
    pub fn new(command: &str, config_bytes: &[u8], out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        Ok(Recorder {
            command: command.to_string(),
            config_sha256: sha256_hex(config_bytes),
            started: Instant::now(),
            out_dir: out_dir.to_path_buf(),
            files: Vec::new(),
            warnings: Vec::new(),
        })
    }

    /// Path for an artifact in the output directory, recorded in the manifest.
    pub fn output(&mut self, name: &str) -> PathBuf {
        let p = self.out_dir.join(name);
        self.files.push(p.clone());
        p
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    /// Check every artifact exists and is non-empty, then write the report.
    pub fn finish(self) -> Result<RunReport> {
        let mut manifest = Vec::with_capacity(self.files.len());
        for path in self.files {
            let meta = std::fs::metadata(&path).map_err(|e| CliError::io(&path, e))?;
            if meta.len() == 0 {
                return Err(CliError::io(
                    &path,
                    std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "artifact is empty"),
                ));
            }
            manifest.push(ManifestEntry {
                path,
                bytes: meta.len(),
            });
        }
        let report = RunReport {
            command: self.command,
            config_sha256: self.config_sha256,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
            manifest,
            warnings: self.warnings,
        };
        let path = self.out_dir.join(REPORT_FILE);
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Parse(e.to_string()))? + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
