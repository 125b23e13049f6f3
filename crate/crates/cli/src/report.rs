//! Output emission: CSV tables, a JSON run summary, and a manifest that
//! records the config hash, seed, crate version and a content hash of every
//! file written, so a run is fully identified by its output directory.

use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use gwlab_core::estimators::EstimateReport;
use gwlab_core::Estimate;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub struct OutputWriter {
    dir: PathBuf,
    written: Vec<(String, String)>,
}

impl OutputWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        self.written.push((name.to_string(), sha256_hex(content)));
        Ok(path)
    }

    /// Writes `manifest.json` and returns every path produced by this run.
    pub fn finish(
        self,
        command: &str,
        config: &ExperimentConfig,
    ) -> Result<Vec<PathBuf>> {
        #[derive(Serialize)]
        struct ManifestFile {
            file: String,
            sha256: String,
        }
        #[derive(Serialize)]
        struct Manifest {
            command: String,
            version: String,
            seed: u64,
            config_sha256: String,
            outputs: Vec<ManifestFile>,
        }
        let manifest = Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config_sha256: sha256_hex(&config.emit()),
            outputs: self
                .written
                .iter()
                .map(|(file, sha256)| ManifestFile {
                    file: file.clone(),
                    sha256: sha256.clone(),
                })
                .collect(),
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        let mut paths: Vec<PathBuf> = self
            .written
            .into_iter()
            .map(|(name, _)| self.dir.join(name))
            .collect();
        paths.push(path);
        Ok(paths)
    }
}

pub fn sha256_hex(content: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(content.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct EstimateJson {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
}

impl From<&Estimate> for EstimateJson {
    fn from(e: &Estimate) -> Self {
        EstimateJson {
            point: e.point,
            lo: e.lo,
            hi: e.hi,
        }
    }
}

#[derive(Serialize)]
pub struct ReportJson {
    pub lambda: f64,
    pub speed: EstimateJson,
    pub sigma00_centered: EstimateJson,
    pub sigma00_literal: EstimateJson,
    pub sigma11: EstimateJson,
    pub sigma01_centered: EstimateJson,
    pub sigma01_literal: EstimateJson,
    pub derivative: EstimateJson,
    pub block_count: usize,
    pub total_steps: u64,
    pub bsum_mean: f64,
    pub bsum_se: f64,
    pub in_window: bool,
    pub diagnostics: BTreeMap<String, f64>,
}

impl From<&EstimateReport> for ReportJson {
    fn from(r: &EstimateReport) -> Self {
        ReportJson {
            lambda: r.lambda,
            speed: (&r.speed).into(),
            sigma00_centered: (&r.cov.sigma00_centered).into(),
            sigma00_literal: (&r.cov.sigma00_literal).into(),
            sigma11: (&r.cov.sigma11).into(),
            sigma01_centered: (&r.cov.sigma01_centered).into(),
            sigma01_literal: (&r.cov.sigma01_literal).into(),
            derivative: (&r.derivative).into(),
            block_count: r.block_count,
            total_steps: r.total_steps,
            bsum_mean: r.bsum_mean,
            bsum_se: r.bsum_se,
            in_window: r.in_window,
            diagnostics: r.diagnostics.iter().cloned().collect(),
        }
    }
}
