//! Dump-level analyses used by the `analyze` commands. Each returns a JSON
//! summary plus named data files; nothing here touches the filesystem.
//!
//! Sentence ids follow `<record id>/<role>` with role `input`,
//! `intermediate` or `output`, so `A-00012/output` is the transformed side
//! of single-rule record `A-00012`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};
use tgforge_core::rng::unit_hash;
use tgforge_core::TransformId;

use crate::ablation::{ablation_contributions, layer_trajectory};
use crate::adf::{Dump, Pooling};
use crate::cluster::{adjusted_rand_index, cosine_matrix, kmeans, pca, separability};
use crate::probe::{lda_direction, probe_heatmap, ProbeModel};
use crate::trend::{checkpoint_trend, TrendPoint};
use crate::vectors::{diff_and_distance, DiffVector};
use crate::AnalysisError;

/// Held-out fraction for probe accuracy, chosen by a hash of the record id.
const HELD_OUT: f64 = 0.2;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub summary: Value,
    pub files: Vec<(String, String)>,
}

/// Splits `A-00012/output` into the single rule and the role.
pub fn parse_sid(sid: &str) -> Option<(&str, TransformId, &str)> {
    let (record, role) = sid.rsplit_once('/')?;
    let (label, _) = record.split_once('-')?;
    let mut chars = label.chars();
    let rule = TransformId::from_letter(chars.next()?)?;
    chars.next().is_none().then_some((record, rule, role))
}

fn vectors_at(dump: &Dump, layer: usize, pooling: Pooling) -> BTreeMap<&str, &Vec<f64>> {
    dump.embeddings
        .iter()
        .filter(|e| e.layer == layer && e.pooling == pooling)
        .map(|e| (e.sentence_id.as_str(), &e.vec))
        .collect()
}

/// Difference vectors of single-rule records at `layer` (default: final).
pub fn diff_vectors(dump: &Dump, layer: Option<usize>, pooling: Pooling) -> Result<Vec<DiffVector>, AnalysisError> {
    let layer = layer.unwrap_or(dump.header.n_layers);
    let vecs = vectors_at(dump, layer, pooling);
    let mut out = Vec::new();
    for (&sid, &vec) in &vecs {
        let Some((record, rule, "output")) = parse_sid(sid) else { continue };
        let base_id = format!("{record}/input");
        let Some(base) = vecs.get(base_id.as_str()) else { continue };
        let (delta, l2) = diff_and_distance(base, vec)?;
        out.push(DiffVector { base_id, transformed_id: sid.to_string(), transform: rule, delta, l2 });
    }
    Ok(out)
}

fn mean_l2_by_transform(diffs: &[DiffVector]) -> (f64, BTreeMap<TransformId, f64>) {
    let mut acc: BTreeMap<TransformId, (f64, usize)> = BTreeMap::new();
    for d in diffs {
        let e = acc.entry(d.transform).or_default();
        e.0 += d.l2;
        e.1 += 1;
    }
    let overall = if diffs.is_empty() { 0.0 } else { diffs.iter().map(|d| d.l2).sum::<f64>() / diffs.len() as f64 };
    (overall, acc.into_iter().map(|(t, (s, n))| (t, s / n as f64)).collect())
}

pub fn analyze_diff(dump: &Dump, layer: Option<usize>, pooling: Pooling) -> Result<Artifacts, AnalysisError> {
    let diffs = diff_vectors(dump, layer, pooling)?;
    if diffs.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let (overall, per) = mean_l2_by_transform(&diffs);
    let mut csv = String::from("base_id,transformed_id,transform,l2\n");
    for d in &diffs {
        writeln!(csv, "{},{},{},{}", d.base_id, d.transformed_id, d.transform.letter(), d.l2).unwrap();
    }
    Ok(Artifacts {
        summary: json!({
            "analysis": "diff",
            "checkpoint": dump.header.revision,
            "layer": layer.unwrap_or(dump.header.n_layers),
            "pairs": diffs.len(),
            "mean_l2": overall,
            "mean_l2_by_transform": per.iter().map(|(t, v)| (t.letter().to_string(), *v)).collect::<BTreeMap<_, _>>(),
        }),
        files: vec![("diffs.csv".into(), csv)],
    })
}

pub fn analyze_cluster(
    dump: &Dump,
    layer: Option<usize>,
    pooling: Pooling,
    k: usize,
    seed: u64,
) -> Result<Artifacts, AnalysisError> {
    let diffs = diff_vectors(dump, layer, pooling)?;
    let points: Vec<Vec<f64>> = diffs.iter().map(|d| d.delta.clone()).collect();
    let labels: Vec<TransformId> = diffs.iter().map(|d| d.transform).collect();
    let km = kmeans(&points, k, seed)?;
    let ari = adjusted_rand_index(&km.assignments, &labels);
    let silhouette = separability(&points, &labels)?;
    let p = pca(&points, 2.min(points[0].len()))?;
    let mut groups: BTreeMap<TransformId, Vec<Vec<f64>>> = BTreeMap::new();
    for d in diffs.iter().filter(|d| d.l2 > 0.0) {
        groups.entry(d.transform).or_default().push(d.delta.clone());
    }
    let cos = cosine_matrix(&groups)?;
    let keys: Vec<TransformId> = groups.keys().copied().collect();
    let mut cos_csv = String::from("transform");
    for t in &keys {
        write!(cos_csv, ",{}", t.letter()).unwrap();
    }
    cos_csv.push('\n');
    for a in &keys {
        cos_csv.push(a.letter());
        for b in &keys {
            write!(cos_csv, ",{}", cos[&(*a, *b)]).unwrap();
        }
        cos_csv.push('\n');
    }
    let mut pca_csv = String::from("transformed_id,transform,cluster,pc1,pc2\n");
    for ((d, proj), c) in diffs.iter().zip(&p.projected).zip(&km.assignments) {
        let pc2 = proj.get(1).copied().unwrap_or(0.0);
        writeln!(pca_csv, "{},{},{},{},{}", d.transformed_id, d.transform.letter(), c, proj[0], pc2).unwrap();
    }
    Ok(Artifacts {
        summary: json!({
            "analysis": "cluster",
            "checkpoint": dump.header.revision,
            "points": points.len(),
            "k": k,
            "seed": seed,
            "inertia": km.inertia,
            "iterations": km.history.len(),
            "adjusted_rand_index": ari,
            "separability": { "score": silhouette, "method": "mean silhouette, euclidean" },
            "pca_explained_ratio": p.explained_ratio,
        }),
        files: vec![("pca.csv".into(), pca_csv), ("cosine.csv".into(), cos_csv)],
    })
}

type Cells = BTreeMap<(usize, TransformId), (Vec<Vec<f64>>, Vec<Vec<f64>>)>;

pub fn analyze_probe(dump: &Dump, pooling: Pooling, ridge: f64) -> Result<Artifacts, AnalysisError> {
    // (layer, transform) -> (train, held-out) output embeddings
    let mut data = Cells::new();
    for e in dump.embeddings.iter().filter(|e| e.pooling == pooling) {
        let Some((record, rule, "output")) = parse_sid(&e.sentence_id) else { continue };
        let cell = data.entry((e.layer, rule)).or_default();
        if unit_hash(record) < HELD_OUT {
            cell.1.push(e.vec.clone());
        } else {
            cell.0.push(e.vec.clone());
        }
    }
    if data.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let layers: Vec<usize> = {
        let mut l: Vec<usize> = data.keys().map(|(l, _)| *l).collect();
        l.dedup();
        l
    };
    let present: Vec<TransformId> = TransformId::ALL.iter().copied().filter(|t| data.keys().any(|(_, r)| r == t)).collect();
    let all_points: BTreeMap<(usize, TransformId), Vec<Vec<f64>>> = data
        .iter()
        .map(|(k, (a, b))| (*k, a.iter().chain(b).cloned().collect()))
        .collect();
    let mut files = Vec::new();
    let mut accuracy = BTreeMap::new();
    let mut skipped = Vec::new();
    for &t in &present {
        let mut probes: BTreeMap<usize, ProbeModel> = BTreeMap::new();
        for &l in &layers {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for ((layer, rule), (train, _)) in &data {
                if *layer == l {
                    if *rule == t { pos.extend(train.iter().cloned()) } else { neg.extend(train.iter().cloned()) }
                }
            }
            match lda_direction(&pos, &neg, ridge, l, t) {
                Ok(m) => {
                    let (mut right, mut total) = (0usize, 0usize);
                    for ((layer, rule), (_, held)) in &data {
                        if *layer == l {
                            for x in held {
                                total += 1;
                                right += (m.classify(x) == (*rule == t)) as usize;
                            }
                        }
                    }
                    if total > 0 {
                        accuracy.insert(format!("{}@{}", t.letter(), l), right as f64 / total as f64);
                    }
                    probes.insert(l, m);
                }
                Err(e) => skipped.push(format!("{}@{}: {e}", t.letter(), l)),
            }
        }
        match probe_heatmap(t, &all_points, &probes) {
            Ok(h) => files.push((format!("heatmap_{}.csv", t.name()), h.to_csv())),
            Err(e) => skipped.push(format!("{} heatmap: {e}", t.letter())),
        }
    }
    Ok(Artifacts {
        summary: json!({
            "analysis": "probe",
            "checkpoint": dump.header.revision,
            "ridge": ridge,
            "layers": layers,
            "held_out_fraction": HELD_OUT,
            "held_out_accuracy": accuracy,
            "skipped": skipped,
        }),
        files,
    })
}

pub fn analyze_ablation(dump: &Dump, top: usize) -> Result<Artifacts, AnalysisError> {
    if dump.ablations.is_empty() && dump.layer_probs.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let mut summary = json!({ "analysis": "ablation", "checkpoint": dump.header.revision });
    let mut files = Vec::new();
    if !dump.ablations.is_empty() {
        let c = ablation_contributions(&dump.ablations, dump.header.n_layers)?;
        let mut csv = String::from("component,layer,kind,mean_delta,records\n");
        for e in &c.effects {
            let kind = if e.component.is_mlp() { "mlp" } else { "attn" };
            writeln!(csv, "{},{},{},{},{}", e.component, e.component.layer(), kind, e.mean_delta, e.records).unwrap();
        }
        files.push(("components.csv".into(), csv));
        summary["contributions"] = c.to_json(top);
    }
    if !dump.layer_probs.is_empty() {
        let t = layer_trajectory(&dump.layer_probs)?;
        let mut csv = String::from("layer,mean_p_target\n");
        for (l, p) in t.mean_curve.iter().enumerate() {
            writeln!(csv, "{l},{p}").unwrap();
        }
        files.push(("trajectory.csv".into(), csv));
        summary["trajectory"] = serde_json::to_value(&t).expect("serializable");
    }
    Ok(Artifacts { summary, files })
}

/// One point per dump, ordered by training step.
pub fn trend_series(dumps: &[Dump], pooling: Pooling) -> Result<Vec<TrendPoint>, AnalysisError> {
    let mut points = dumps
        .iter()
        .map(|d| {
            let step = d
                .header
                .step()
                .ok_or_else(|| AnalysisError::Range(format!("revision `{}` has no step number", d.header.revision)))?;
            let (mean_l2, per_transform) = mean_l2_by_transform(&diff_vectors(d, None, pooling)?);
            Ok(TrendPoint { step, mean_l2, per_transform })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    points.sort_by_key(|p| p.step);
    Ok(points)
}

pub fn analyze_trend(dumps: &[Dump], pooling: Pooling) -> Result<Artifacts, AnalysisError> {
    let series = trend_series(dumps, pooling)?;
    let report = checkpoint_trend(&series)?;
    let mut csv = String::from("step,mean_l2");
    for t in TransformId::ALL {
        write!(csv, ",{}", t.letter()).unwrap();
    }
    csv.push('\n');
    for p in &series {
        write!(csv, "{},{}", p.step, p.mean_l2).unwrap();
        for t in TransformId::ALL {
            match p.per_transform.get(&t) {
                Some(v) => write!(csv, ",{v}").unwrap(),
                None => csv.push(','),
            }
        }
        csv.push('\n');
    }
    let mut summary = serde_json::to_value(&report).expect("serializable");
    summary["analysis"] = json!("trend");
    Ok(Artifacts { summary, files: vec![("trend.csv".into(), csv)] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sid_parsing() {
        assert_eq!(parse_sid("A-00012/output"), Some(("A-00012", TransformId::NpPassive1, "output")));
        assert_eq!(parse_sid("A+H-00001/output"), None);
        assert_eq!(parse_sid("nonsense"), None);
    }
}
