//! The `manifest.csv` index written by `synth` and read by the batch
//! commands. Paths are relative to the manifest's directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const FILE_NAME: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    pub subject: String,
    pub sample: u32,
    pub rotation_deg: f64,
    pub image: String,
    pub maps: String,
    pub annotation: String,
    pub mask: String,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub dir: PathBuf,
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let path = dir.join(FILE_NAME);
        let mut r = csv::Reader::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
        let rows = r.deserialize().collect::<Result<Vec<ManifestRow>, _>>().with_context(|| format!("parsing {}", path.display()))?;
        if rows.is_empty() {
            bail!("{} lists no cases", path.display());
        }
        Ok(Self { dir, rows })
    }

    pub fn write(dir: impl AsRef<Path>, rows: &[ManifestRow]) -> Result<()> {
        let mut w = csv::Writer::from_path(dir.as_ref().join(FILE_NAME))?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }
}
