use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::config::ExperimentConfig;

pub const SCHEMA: &str = "pbl-report/1";

/// Top-level report written as `<stem>.json`.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'static str,
    pub config: &'a ExperimentConfig,
    pub config_sha256: String,
    pub passed: bool,
    pub summary: String,
    pub constants: BTreeMap<String, f64>,
    pub result: T,
    /// Companion files, relative to the report.
    pub files: Vec<String>,
}

/// Output directory plus the file stem `<command>-<label>-<checksum prefix>`.
pub struct Output {
    pub dir: PathBuf,
    pub stem: String,
}

impl Output {
    pub fn new(dir: &Path, config: &ExperimentConfig, label: &str) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            stem: format!("{}-{label}-{}", config.command(), &config.checksum()[..12]),
        })
    }

    pub fn file(&self, ext: &str) -> (String, PathBuf) {
        let name = format!("{}.{ext}", self.stem);
        let path = self.dir.join(&name);
        (name, path)
    }

    pub fn write_text(&self, ext: &str, text: &str) -> anyhow::Result<String> {
        let (name, path) = self.file(ext);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(name)
    }

    pub fn write_report<T: Serialize>(&self, report: &Report<'_, T>) -> anyhow::Result<PathBuf> {
        let (_, path) = self.file("json");
        let mut text = serde_json::to_string_pretty(report)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
