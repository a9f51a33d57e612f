//! Run manifests and write-once output handling.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_VERSION: u32 = 1;
pub const TOOL: &str = "echomesh";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub name: String,
    pub outputs: Vec<FileHash>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub config_schema_version: u32,
    pub format_version: u32,
    pub command: String,
    pub seed: u64,
    /// Command-line parameters other than paths.
    pub parameters: Value,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    /// Completed steps, for commands that run several.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<Step>,
    pub config: Value,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, parameters: Value, config: Value) -> Self {
        Manifest {
            manifest_version: MANIFEST_VERSION,
            tool: TOOL.into(),
            tool_version: TOOL_VERSION.into(),
            config_schema_version: echomesh::config::CONFIG_SCHEMA_VERSION,
            format_version: echomesh::io::FORMAT_VERSION,
            command: command.into(),
            seed,
            parameters,
            inputs: Vec::new(),
            outputs: Vec::new(),
            steps: Vec::new(),
            config,
        }
    }

    pub fn add_input(&mut self, role: &str, path: &Path) -> CliResult<()> {
        self.inputs.push(FileHash {
            role: role.into(),
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> CliResult<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| echomesh::Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Resume(format!("{}: {e}", path.display())))
    }
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| echomesh::Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hash of `path`, recorded relative to `base`.
pub fn hash_output(role: &str, base: &Path, path: &Path) -> CliResult<FileHash> {
    let rel = path.strip_prefix(base).unwrap_or(path);
    Ok(FileHash {
        role: role.into(),
        path: rel.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

pub fn require_input(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::MissingInput(path.to_path_buf()))
    }
}

/// Refuses to replace an existing file unless `force`.
pub fn check_writable(path: &Path, force: bool) -> CliResult<()> {
    if path.exists() && !force {
        return Err(CliError::OutputExists(path.to_path_buf()));
    }
    Ok(())
}

/// Writes through a temporary sibling and renames, so a failed run leaves
/// nothing behind under `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let tmp = temp_sibling(path);
    fs::write(&tmp, bytes).map_err(|e| echomesh::Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| echomesh::Error::io(path, e))?;
    Ok(())
}

pub fn temp_sibling(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.partial-{}", std::process::id()))
}

pub fn create_parent(path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| echomesh::Error::io(parent, e))?;
    }
    Ok(())
}

/// A run directory built under a temporary name and moved into place by
/// [`StagedDir::commit`]. Dropping it uncommitted removes the partial tree.
pub struct StagedDir {
    pub path: PathBuf,
    target: PathBuf,
    committed: bool,
}

impl StagedDir {
    pub fn new(target: &Path, force: bool) -> CliResult<StagedDir> {
        if target.exists() && !force && !dir_is_empty(target) {
            return Err(CliError::OutputExists(target.to_path_buf()));
        }
        create_parent(target)?;
        let path = temp_sibling(target);
        if path.exists() {
            fs::remove_dir_all(&path).map_err(|e| echomesh::Error::io(&path, e))?;
        }
        fs::create_dir_all(&path).map_err(|e| echomesh::Error::io(&path, e))?;
        Ok(StagedDir {
            path,
            target: target.to_path_buf(),
            committed: false,
        })
    }

    pub fn commit(mut self) -> CliResult<PathBuf> {
        if self.target.exists() {
            fs::remove_dir_all(&self.target).map_err(|e| echomesh::Error::io(&self.target, e))?;
        }
        fs::rename(&self.path, &self.target).map_err(|e| echomesh::Error::io(&self.target, e))?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for StagedDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.path);
        }
    }
}

pub fn dir_is_empty(path: &Path) -> bool {
    fs::read_dir(path).map(|mut d| d.next().is_none()).unwrap_or(false)
}

/// `runs/<command>-<unix seconds>` for commands given no output directory.
pub fn default_run_dir(command: &str) -> PathBuf {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    PathBuf::from("runs").join(format!("{command}-{secs}"))
}
