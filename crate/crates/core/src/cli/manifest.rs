use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::Failure;
use crate::ingest::Dataset;

/// `dataset.toml`: paths to the three input files, relative to the manifest.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub edges: PathBuf,
    pub events: PathBuf,
    pub topics: PathBuf,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<(Self, PathBuf), Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        let m: Manifest = toml::from_str(&text)
            .map_err(|e| Failure::Usage(format!("bad manifest {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((m, base))
    }

    pub fn load(path: &Path) -> Result<Dataset, Failure> {
        let (m, base) = Self::read(path)?;
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        Dataset::load(&resolve(&m.edges), &resolve(&m.events), &resolve(&m.topics)).map_err(Failure::from)
    }
}
