//! Config files and the output-directory helpers shared by the subcommands.
//!
//! A config file holds optional `[simulate]` and `[run]` tables. Values
//! there replace the defaults; command-line flags replace both.

use std::fs;
use std::path::{Path, PathBuf};

use font_core::federation::SuiteConfig;
use font_core::simdata::{MarkovSimConfig, SimulationConfig};
use font_core::{FontError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    #[default]
    Gaussian,
    Markov,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateFile {
    pub kind: DataKind,
    pub gaussian: SimulationConfig,
    pub markov: MarkovSimConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub simulate: SimulateFile,
    /// Benchmark grid and method options. `seed` here is the lowest-priority seed.
    pub run: Option<SuiteConfig>,
}

impl ConfigFile {
    /// TOML unless the extension is `.json`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            toml::from_str(&text).map_err(|e| FontError::ConfigInvalid(format!("{}: {e}", path.display())))
        }
    }
}

/// Flag, then `FONT_SEED`, then the config file, then zero.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("FONT_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| FontError::ConfigInvalid(format!("FONT_SEED=`{v}` is not an integer"))),
        Err(_) => Ok(file.unwrap_or(0)),
    }
}

/// A scratch directory next to `target` that becomes `target` on [`Staged::commit`].
/// Dropping it uncommitted removes the scratch directory.
pub struct Staged {
    tmp: PathBuf,
    target: PathBuf,
    committed: bool,
}

impl Staged {
    pub fn new(target: &Path, force: bool) -> Result<Self> {
        if target.exists() {
            let empty = target.is_dir() && fs::read_dir(target)?.next().is_none();
            if !empty && !force {
                return Err(FontError::ConfigInvalid(format!(
                    "{} already exists; pass --force to replace it",
                    target.display()
                )));
            }
        }
        let name = target
            .file_name()
            .ok_or_else(|| FontError::ConfigInvalid(format!("bad output path {}", target.display())))?;
        let parent = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        fs::create_dir_all(parent)?;
        let tmp = parent.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
        if tmp.exists() {
            fs::remove_dir_all(&tmp)?;
        }
        fs::create_dir(&tmp)?;
        Ok(Self { tmp, target: target.to_path_buf(), committed: false })
    }

    pub fn path(&self) -> &Path {
        &self.tmp
    }

    pub fn commit(mut self) -> Result<()> {
        if self.target.is_dir() {
            fs::remove_dir_all(&self.target)?;
        } else if self.target.exists() {
            fs::remove_file(&self.target)?;
        }
        fs::rename(&self.tmp, &self.target)?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.tmp);
        }
    }
}

/// Writes a single file through a temporary sibling.
pub fn write_file_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp-{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
