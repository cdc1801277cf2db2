//! Staged output files. Nothing touches the output directory until every
//! file of a command has been built; each file is then written to a
//! temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{AppError, Result};
use crate::format::to_json;

#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        OutputSet::default()
    }

    pub fn add(&mut self, relative: impl Into<PathBuf>, bytes: impl Into<Vec<u8>>) {
        self.files.push((relative.into(), bytes.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, relative: impl Into<PathBuf>, value: &T) -> Result<()> {
        let s = to_json(value)?;
        self.add(relative, s);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn get(&self, relative: &Path) -> Option<&[u8]> {
        self.files.iter().find(|(p, _)| p == relative).map(|(_, b)| b.as_slice())
    }

    /// Writes every file under `dir`.
    pub fn commit(&self, dir: &Path) -> Result<()> {
        for (rel, bytes) in &self.files {
            write_atomic(&dir.join(rel), bytes)?;
        }
        Ok(())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| AppError::Write {
        path: path.to_path_buf(),
        source,
    };
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(parent).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

/// Run description written next to the outputs. The timestamp lives only
/// here so the data files are byte-identical across reruns.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub command: String,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub threads: usize,
    pub created_unix_s: u64,
    pub files: Vec<String>,
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn new(command: &str, seed: Option<u64>, threads: usize, outputs: &OutputSet) -> Self {
        Metadata {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            threads,
            created_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            files: outputs.paths().map(|p| p.display().to_string()).collect(),
            notes: Vec::new(),
        }
    }
}

pub const METADATA_FILE: &str = "metadata.json";
