//! Persistent collection of original trajectories and their watermarks.
//!
//! Layout under the root directory:
//!
//! ```text
//! index.json              {"version": 1, "entries": [{"id", "trajectory", "spec"}, ...]}
//! trajectories/NNNNNN.csv one original per file, generic CSV schema
//! specs/NNNNNN.json       the matching watermark spec
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{segment, Trajectory};
use crate::watermark::{select_candidate, verify_against, VerificationReport, WatermarkSpec};

use super::io::{load_csv, write_csv};

const INDEX_FILE: &str = "index.json";
const STORE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Index {
    version: u32,
    entries: Vec<IndexEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexEntry {
    id: String,
    trajectory: String,
    spec: String,
}

#[derive(Debug, Clone, Default)]
pub struct TrajectoryStore {
    originals: BTreeMap<String, Trajectory>,
    specs: BTreeMap<String, WatermarkSpec>,
}

impl TrajectoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an original with the watermark embedded into its copy.
    /// Replaces any earlier entry with the same id.
    pub fn insert(&mut self, original: Trajectory, spec: WatermarkSpec) -> Result<()> {
        spec.validate()?;
        let blocks = segment(original.points(), spec.block_size)?.block_count();
        if blocks != spec.block_count() {
            return Err(Error::domain(format!(
                "trajectory {:?} has {blocks} blocks but its watermark has {}",
                original.id(),
                spec.block_count()
            )));
        }
        let id = original.id().to_string();
        self.originals.insert(id.clone(), original);
        self.specs.insert(id, spec);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.originals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }

    pub fn original(&self, id: &str) -> Option<&Trajectory> {
        self.originals.get(id)
    }

    pub fn spec(&self, id: &str) -> Option<&WatermarkSpec> {
        self.specs.get(id)
    }

    pub fn originals(&self) -> impl Iterator<Item = &Trajectory> {
        self.originals.values()
    }

    /// Selects the closest original and verifies the suspect against that original's watermark.
    pub fn verify(&self, suspect: &Trajectory, tau: f64) -> Result<VerificationReport> {
        let original = select_candidate(suspect, self.originals.values())?;
        let spec = &self.specs[original.id()];
        verify_against(suspect, original, spec, tau)
    }

    pub fn save(&self, root: &Path) -> Result<()> {
        for dir in ["trajectories", "specs"] {
            let d = root.join(dir);
            fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
        let mut entries = Vec::with_capacity(self.len());
        for (n, (id, t)) in self.originals.iter().enumerate() {
            let entry = IndexEntry {
                id: id.clone(),
                trajectory: format!("trajectories/{n:06}.csv"),
                spec: format!("specs/{n:06}.json"),
            };
            write_csv(&root.join(&entry.trajectory), [t])?;
            self.specs[id].save(&root.join(&entry.spec))?;
            entries.push(entry);
        }
        let index = Index {
            version: STORE_VERSION,
            entries,
        };
        let path = root.join(INDEX_FILE);
        let body = serde_json::to_string_pretty(&index).expect("index serializes");
        fs::write(&path, body + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn open(root: &Path) -> Result<Self> {
        let path = root.join(INDEX_FILE);
        let body = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let index: Index = serde_json::from_str(&body)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if index.version != STORE_VERSION {
            return Err(Error::Format(format!(
                "unsupported store version {}",
                index.version
            )));
        }
        let mut store = TrajectoryStore::new();
        for entry in index.entries {
            let tpath: PathBuf = root.join(&entry.trajectory);
            let mut ts = load_csv(&tpath)?;
            if ts.len() != 1 || ts[0].id() != entry.id {
                return Err(Error::Format(format!(
                    "{} does not hold exactly trajectory {:?}",
                    tpath.display(),
                    entry.id
                )));
            }
            let spec = WatermarkSpec::load(&root.join(&entry.spec))?;
            store.insert(ts.remove(0), spec)?;
        }
        Ok(store)
    }
}
