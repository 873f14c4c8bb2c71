//! Run configuration: command-line flags over a TOML config file over
//! built-in defaults.
//!
//! ```toml
//! seed = 7            # also read from TGFORGE_SEED when absent everywhere
//! jobs = 4
//! lexicon = "my_lexicon.tsv"
//! templates = "my_templates.tsv"
//! log_level = "info"
//!
//! [generate]          # same keys as a --spec file
//! single_count = 200
//! nested_count = 50
//! nested = ["D+G", "C+H"]
//! [generate.split]
//! ood_combinations = ["A+H", "E+H"]
//! val_fraction = 0.1
//! with_intermediates = true
//!
//! [analyze]
//! k = 10
//! pooling = "mean"    # or "last_token"
//! layer = 24          # default: final layer
//! ridge = 1e-6
//! top = 20
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tgforge_analysis::{Pooling, DEFAULT_RIDGE};
use tgforge_core::datasetgen::GenSpec;

pub const SEED_ENV: &str = "TGFORGE_SEED";

/// A problem with user-supplied configuration; exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeConfig {
    pub k: usize,
    pub pooling: Pooling,
    pub layer: Option<usize>,
    pub ridge: f64,
    pub top: usize,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig { k: 10, pooling: Pooling::Mean, layer: None, ridge: DEFAULT_RIDGE, top: 20 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub lexicon: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub log_level: Option<String>,
    pub generate: Option<toml::Table>,
    #[serde(default)]
    pub analyze: AnalyzeConfig,
}

fn read_toml(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

fn describe(path: &Path, e: toml::de::Error) -> ConfigError {
    ConfigError(format!("{}: {}", path.display(), e.message()))
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig, ConfigError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let mut cfg: FileConfig = toml::from_str(&read_toml(path)?).map_err(|e| describe(path, e))?;
    // Relative paths in the config file are relative to the file itself.
    let base = path.parent().unwrap_or(Path::new("."));
    for p in [&mut cfg.lexicon, &mut cfg.templates].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    if cfg.analyze.k == 0 {
        return Err(ConfigError("analyze.k must be at least 1".into()));
    }
    if cfg.analyze.ridge.is_nan() || cfg.analyze.ridge < 0.0 {
        return Err(ConfigError("analyze.ridge must be non-negative".into()));
    }
    Ok(cfg)
}

pub fn env_seed() -> Result<Option<u64>, ConfigError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError(format!("{SEED_ENV}: `{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Seed precedence: flag, then config file, then `TGFORGE_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, ConfigError> {
    Ok(match (flag, file) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => env_seed()?.unwrap_or(0),
    })
}

/// Builds the generation spec from the config's `[generate]` table with a
/// `--spec` file laid over it key by key, then the seed flag on top.
pub fn resolve_gen_spec(
    file: &FileConfig,
    spec_path: Option<&Path>,
    seed_flag: Option<u64>,
) -> Result<GenSpec, ConfigError> {
    let mut table = file.generate.clone().unwrap_or_default();
    if let Some(path) = spec_path {
        let overlay: toml::Table = toml::from_str(&read_toml(path)?).map_err(|e| describe(path, e))?;
        table.extend(overlay);
    }
    let spec_seed = table.get("seed").is_some();
    let mut spec: GenSpec = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError(format!("generate: {}", e.message())))?;
    let file_seed = if spec_seed { Some(spec.seed) } else { file.seed };
    spec.seed = resolve_seed(seed_flag, file_seed)?;
    spec.validate().map_err(ConfigError)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn unknown_key_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.toml", "sede = 3\n");
        let err = load_file_config(Some(&p)).unwrap_err();
        assert!(err.0.contains("sede"), "{}", err.0);
        let p = write(dir.path(), "c.toml", "[analyze]\nkk = 3\n");
        assert!(load_file_config(Some(&p)).unwrap_err().0.contains("kk"));
    }

    #[test]
    fn spec_overlays_config_and_flag_wins() {
        let dir = tempfile::tempdir().unwrap();
        let c = write(dir.path(), "c.toml", "seed = 5\n[generate]\nsingle_count = 10\nnested_count = 3\n");
        let s = write(dir.path(), "s.toml", "nested_count = 4\n");
        let file = load_file_config(Some(&c)).unwrap();
        let spec = resolve_gen_spec(&file, Some(&s), None).unwrap();
        assert_eq!((spec.single_count, spec.nested_count, spec.seed), (10, 4, 5));
        let spec = resolve_gen_spec(&file, Some(&s), Some(9)).unwrap();
        assert_eq!(spec.seed, 9);
        let bad = write(dir.path(), "b.toml", "single_count = 0\n");
        assert!(resolve_gen_spec(&file, Some(&bad), None).unwrap_err().0.contains("single_count"));
        let bad = write(dir.path(), "b.toml", "[split]\nval_fraction = 2.0\n");
        assert!(resolve_gen_spec(&file, Some(&bad), None).unwrap_err().0.contains("val_fraction"));
        let bad = write(dir.path(), "b.toml", "nested = [\"A+Z\"]\n");
        assert!(resolve_gen_spec(&file, Some(&bad), None).is_err());
    }
}
