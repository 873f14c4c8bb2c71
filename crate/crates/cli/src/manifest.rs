use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "run.json";

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// Hashes of every file under `dir` except the manifest, keyed by
/// `/`-separated relative path.
pub fn hash_tree(dir: &Path) -> Result<BTreeMap<String, String>> {
    let mut files = Vec::new();
    walk(dir, &mut files)?;
    let mut out = BTreeMap::new();
    for f in files {
        let rel = f.strip_prefix(dir).expect("walked under dir");
        let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        if key != MANIFEST {
            out.insert(key, sha256_file(&f)?);
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    argv: Vec<String>,
    version: &'a str,
    config: &'a C,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

/// Writes `run.json` into `out`: the resolved configuration, the argument
/// vector, and sha256 hashes of inputs and outputs.
pub fn write_manifest<C: Serialize>(out: &Path, command: &str, config: &C, inputs: &[PathBuf]) -> Result<()> {
    let mut input_hashes = BTreeMap::new();
    for p in inputs {
        input_hashes.insert(p.display().to_string(), sha256_file(p)?);
    }
    let manifest = Manifest {
        command,
        argv: std::env::args().skip(1).collect(),
        version: tgforge_core::GENERATOR_VERSION,
        config,
        inputs: input_hashes,
        outputs: hash_tree(out)?,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(out.join(MANIFEST), text)?;
    Ok(())
}
