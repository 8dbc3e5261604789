//! Staged output files, committed by write-temp-then-rename, plus the run
//! manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::CliError;

pub const MANIFEST_SUFFIX: &str = ".manifest.json";

const RESIDUAL_UNIT: &str = "percentage points of non-frozen pixels (0-100); Huber phi = 1.35";
const MACC_DEFINITION: &str = "mean of the frozen and non-frozen per-class recalls, in percent";

/// Files produced by one subcommand, held in memory until every step has
/// succeeded.
#[derive(Debug, Default)]
pub struct Staged {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Staged {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.push((path.into(), bytes.into()));
    }

    pub fn paths(&self) -> Vec<&Path> {
        self.files.iter().map(|(p, _)| p.as_path()).collect()
    }

    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::with_capacity(self.files.len());
        for (path, bytes) in self.files {
            write_atomic(&path, &bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[derive(Serialize)]
struct InputEntry {
    path: String,
    bytes: Option<u64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    created_utc: String,
    inputs: Vec<InputEntry>,
    outputs: Vec<String>,
    settings: &'a PipelineConfig,
    residual_unit: &'a str,
    m_acc_definition: &'a str,
}

/// Commit `staged`, then record what went in and out next to it.
pub fn finish(command: &str, cfg: &PipelineConfig, inputs: &[PathBuf], staged: Staged) -> Result<PathBuf, CliError> {
    let outputs = staged.commit()?;
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        created_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        inputs: inputs
            .iter()
            .map(|p| InputEntry {
                path: p.display().to_string(),
                bytes: std::fs::metadata(p).ok().filter(|m| m.is_file()).map(|m| m.len()),
            })
            .collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        settings: cfg,
        residual_unit: RESIDUAL_UNIT,
        m_acc_definition: MACC_DEFINITION,
    };
    let path = cfg.out.join(format!("{command}{MANIFEST_SUFFIX}"));
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}
