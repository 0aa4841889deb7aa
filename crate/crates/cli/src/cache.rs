use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use btlab_core::graph::LabeledGraph;
use btlab_core::FieldDescriptor;
use sha2::{Digest, Sha256};

/// Bumped whenever ball enumeration or its JSON changes.
pub const BALL_VERSION: &str = "ball-v1";

pub fn ball_key(desc: &FieldDescriptor, r: u32, d: usize) -> String {
    let mut h = Sha256::new();
    h.update(desc.to_json().to_string());
    h.update(format!("|R={r}|d={d}|{BALL_VERSION}"));
    hex::encode(h.finalize())
}

/// Content-addressed store of ball graphs in JSON form.
#[derive(Clone, Debug)]
pub struct BallCache {
    dir: PathBuf,
}

impl BallCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        BallCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Option<LabeledGraph> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let value = serde_json::from_str(&text).ok()?;
        LabeledGraph::from_json(&value).ok()
    }

    /// Writes to a temporary file and renames it into place, so readers
    /// never see a partial entry.
    pub fn store(&self, key: &str, graph: &LabeledGraph) -> Result<()> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(graph.to_json().to_string().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.path(key))?;
        Ok(())
    }
}
