use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use motifcall::experiment::ExperimentConfig;
use motifcall::formats::{digest_bytes, to_json_bytes};
use serde::{Deserialize, Serialize};

pub const PARTIAL_MARKER: &str = ".partial";
pub const MANIFEST: &str = "manifest.json";
pub const CONFIG: &str = "config.toml";

/// Record of inputs and output digests written next to every command's outputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub library_digest: Option<String>,
    pub pore_digest: Option<String>,
    /// File name to content digest.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    /// Manifest of the directory holding `file`, if any.
    pub fn beside(file: &Path) -> Result<Option<Manifest>> {
        let path = file.parent().unwrap_or(Path::new(".")).join(MANIFEST);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Some(
            serde_json::from_slice(&text).with_context(|| format!("parsing {}", path.display()))?,
        ))
    }
}

/// An output directory that stays marked partial until [`OutDir::finish`].
pub struct OutDir {
    dir: PathBuf,
    manifest: Manifest,
}

impl OutDir {
    pub fn create(dir: &Path, command: &str) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let marker = dir.join(PARTIAL_MARKER);
        fs::write(&marker, format!("{command}\n"))
            .with_context(|| format!("writing {}", marker.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                command: command.to_string(),
                ..Manifest::default()
            },
        })
    }

    pub fn set_digests(&mut self, library: &str, pore: Option<&str>) {
        self.manifest.library_digest = Some(library.to_string());
        self.manifest.pore_digest = pore.map(str::to_string);
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.manifest
            .files
            .insert(name.to_string(), digest_bytes(bytes));
        Ok(())
    }

    /// Writes the resolved config and manifest, then clears the partial marker.
    pub fn finish(mut self, cfg: &ExperimentConfig) -> Result<()> {
        let config = toml::to_string(cfg).context("serialising config")?;
        self.write(CONFIG, config.as_bytes())?;
        let manifest = to_json_bytes(&self.manifest)?;
        let path = self.dir.join(MANIFEST);
        fs::write(&path, manifest).with_context(|| format!("writing {}", path.display()))?;
        let marker = self.dir.join(PARTIAL_MARKER);
        fs::remove_file(&marker).with_context(|| format!("removing {}", marker.display()))?;
        Ok(())
    }
}
