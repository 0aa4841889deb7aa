use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use btlab_core::{validate, Budget, FieldDescriptor};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedField {
    pub name: String,
    pub descriptor: FieldDescriptor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub fields: Vec<NamedField>,
    pub d: usize,
    pub r_min: u32,
    pub r_max: u32,
    #[serde(default)]
    pub budget: Budget,
    /// Wall-clock limit per cell, in seconds.
    #[serde(default = "default_time")]
    pub time_limit_secs: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_true")]
    pub cache: bool,
    /// Defaults to `<output_dir>/cache`.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Random relabellings per ball used to spot-check certificates.
    #[serde(default = "default_shuffles")]
    pub shuffles: usize,
    /// Longest cycle in the germ certificate.
    #[serde(default = "default_k")]
    pub certificate_k: usize,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_time() -> u64 {
    600
}
fn default_true() -> bool {
    true
}
fn default_shuffles() -> usize {
    2
}
fn default_k() -> usize {
    3
}

impl ExperimentConfig {
    /// Reads a config; relative directories are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| btlab_core::Error::Parse(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(cfg)
    }

    pub fn output_path(&self) -> PathBuf {
        self.base_dir.join(&self.output_dir)
    }

    pub fn cache_path(&self) -> PathBuf {
        match &self.cache_dir {
            Some(c) => self.base_dir.join(c),
            None => self.output_path().join("cache"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| -> anyhow::Error { btlab_core::Error::InvalidInput(msg).into() };
        if self.fields.is_empty() {
            return Err(invalid("field list is empty".into()));
        }
        for f in &self.fields {
            let problems = validate(&f.descriptor);
            if !problems.is_empty() {
                return Err(btlab_core::Error::InvalidDescriptor(
                    problems.into_iter().map(|p| format!("{}: {p}", f.name)).collect(),
                )
                .into());
            }
        }
        if self.d < 2 {
            return Err(invalid(format!("d = {} is below 2", self.d)));
        }
        if self.r_min == 0 || self.r_min > self.r_max {
            return Err(invalid(format!("R range {}..={} is empty", self.r_min, self.r_max)));
        }
        let b = &self.budget;
        if b.max_ring == 0 || b.max_iso == 0 || b.max_vertices == 0 || b.max_search == 0 || self.time_limit_secs == 0 {
            return Err(invalid("budgets must be positive".into()));
        }
        let out = self.output_path();
        if let Err(e) = fs::create_dir_all(&out) {
            bail!(invalid(format!("output directory {}: {e}", out.display())));
        }
        let probe = out.join(".write-probe");
        fs::write(&probe, b"").map_err(|e| invalid(format!("output directory {} is not writable: {e}", out.display())))?;
        let _ = fs::remove_file(probe);
        Ok(())
    }
}
