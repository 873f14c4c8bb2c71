//! Merges evaluation and analysis JSON outputs into one markdown summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;
use tgforge_core::evalharness::Bucket;

fn collect(dir: &Path, out: &mut Vec<(PathBuf, Value)>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "json") && !path.ends_with("run.json") {
            let text = fs::read_to_string(&path)?;
            let value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            out.push((path, value));
        }
    }
    Ok(())
}

fn num(v: &Value) -> String {
    match v.as_f64() {
        Some(x) => format!("{x:.4}"),
        None => "n/a".into(),
    }
}

fn pct(v: &Value) -> String {
    v.as_str().map(|s| format!("{s}%")).unwrap_or_else(|| "n/a".into())
}

fn eval_section(md: &mut String, v: &Value) {
    md.push_str("## Exact and partial match accuracy\n\n| Setting | n | Exact match | Partial match |\n|---|---:|---:|---:|\n");
    for row in v["buckets"].as_array().into_iter().flatten() {
        let bucket = serde_json::from_value::<Bucket>(row["bucket"].clone())
            .map(|b| b.to_string())
            .unwrap_or_else(|_| "?".into());
        writeln!(md, "| {} | {} | {} | {} |", bucket, row["n"], pct(&row["exact_pct"]), pct(&row["partial_pct"])).unwrap();
    }
    md.push('\n');
}

fn analysis_section(md: &mut String, v: &Value) {
    let ckpt = v["checkpoint"].as_str().unwrap_or("");
    match v["analysis"].as_str() {
        Some("diff") => {
            writeln!(md, "## Representation distance ({ckpt})\n\nMean L2 distance between base and transformed sentences at layer {}: {} over {} pairs.\n", v["layer"], num(&v["mean_l2"]), v["pairs"]).unwrap();
            md.push_str("| Transform | Mean L2 |\n|---|---:|\n");
            for (t, x) in v["mean_l2_by_transform"].as_object().into_iter().flatten() {
                writeln!(md, "| {t} | {} |", num(x)).unwrap();
            }
            md.push('\n');
        }
        Some("cluster") => {
            writeln!(
                md,
                "## Clustering of difference vectors ({ckpt})\n\nk-means with k = {} on {} vectors: adjusted Rand index {} against transformation labels; separability (mean silhouette) {}. PCA explained variance ratios: {}.\n",
                v["k"], v["points"], num(&v["adjusted_rand_index"]), num(&v["separability"]["score"]), v["pca_explained_ratio"]
            )
            .unwrap();
        }
        Some("probe") => {
            writeln!(md, "## LDA probes ({ckpt})\n\n| Probe@layer | Held-out accuracy |\n|---|---:|").unwrap();
            for (k, x) in v["held_out_accuracy"].as_object().into_iter().flatten() {
                writeln!(md, "| {k} | {} |", num(x)).unwrap();
            }
            md.push('\n');
        }
        Some("ablation") => {
            writeln!(md, "## Causal contributions ({ckpt})\n").unwrap();
            let c = &v["contributions"];
            if !c.is_null() {
                writeln!(
                    md,
                    "MLP blocks account for {} and attention heads for {} of the positive causal contribution; last-third share {}.\n",
                    num(&c["mlp_share"]["value"]), num(&c["attn_share"]["value"]), num(&c["last_third_share"])
                )
                .unwrap();
            }
            let t = &v["trajectory"];
            if !t.is_null() {
                writeln!(
                    md,
                    "Layer-wise decoding: total gain {}, fraction in the last third of layers {}, half of the final probability first reached at layer {}.\n",
                    num(&t["total_gain"]), num(&t["last_third_fraction"]), t["half_layer"]
                )
                .unwrap();
            }
        }
        Some("trend") => {
            md.push_str("## Checkpoint trend\n\n| Step | Mean L2 |\n|---:|---:|\n");
            let steps = v["steps"].as_array().cloned().unwrap_or_default();
            let means = v["mean_l2"].as_array().cloned().unwrap_or_default();
            for (s, m) in steps.iter().zip(&means) {
                writeln!(md, "| {s} | {} |", num(m)).unwrap();
            }
            writeln!(md, "\nLargest relative increase at step {}.\n", v["phase_transition"]).unwrap();
        }
        _ => {}
    }
}

pub fn build_report(inputs: &[PathBuf]) -> Result<String> {
    let mut docs = Vec::new();
    for dir in inputs {
        if dir.is_dir() {
            collect(dir, &mut docs)?;
        } else {
            let value = serde_json::from_str(&fs::read_to_string(dir)?)?;
            docs.push((dir.clone(), value));
        }
    }
    let mut md = String::from("# Summary\n\n");
    for (path, v) in &docs {
        if v.get("buckets").is_some() {
            eval_section(&mut md, v);
        } else if v.get("analysis").is_some() {
            analysis_section(&mut md, v);
        } else {
            tracing::warn!("skipping {}", path.display());
        }
    }
    Ok(md)
}
