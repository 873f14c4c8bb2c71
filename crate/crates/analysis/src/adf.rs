//! Activation Dump Format: UTF-8 JSON Lines, a header on line 1 and one
//! typed record per following line. Vectors are little-endian `f32`
//! payloads encoded in standard base64.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    Mean,
    LastToken,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpHeader {
    pub model_id: String,
    pub revision: String,
    pub d_model: usize,
    pub n_layers: usize,
    pub n_heads: usize,
    #[serde(default)]
    pub pooling: Vec<Pooling>,
    #[serde(default)]
    pub tokenizer_hash: String,
}

impl DumpHeader {
    /// Training step parsed from the revision (`step64000` → 64000).
    pub fn step(&self) -> Option<u64> {
        let digits: String = self.revision.chars().filter(char::is_ascii_digit).collect();
        digits.parse().ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Component {
    Attn { layer: usize, head: usize },
    Mlp { layer: usize },
}

impl Component {
    pub fn layer(&self) -> usize {
        match *self {
            Component::Attn { layer, .. } | Component::Mlp { layer } => layer,
        }
    }

    pub fn is_mlp(&self) -> bool {
        matches!(self, Component::Mlp { .. })
    }
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Component::Attn { layer, head } => write!(f, "attn.{layer}.{head}"),
            Component::Mlp { layer } => write!(f, "mlp.{layer}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub sentence_id: String,
    pub checkpoint: String,
    pub layer: usize,
    pub pooling: Pooling,
    pub vec: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationRecord {
    #[serde(rename = "sid")]
    pub sentence_id: String,
    pub component: Component,
    pub p_clean: f64,
    pub p_ablated: f64,
    #[serde(rename = "target")]
    pub target_token: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerProbRecord {
    #[serde(rename = "sid")]
    pub sentence_id: String,
    pub layer: usize,
    pub p_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEmbedding {
    sid: String,
    layer: usize,
    pooling: Pooling,
    vec_b64: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawRecord {
    Embedding(RawEmbedding),
    Ablation(AblationRecord),
    LayerProb(LayerProbRecord),
}

/// Contents of one dump file.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub header: DumpHeader,
    pub embeddings: Vec<EmbeddingRecord>,
    pub ablations: Vec<AblationRecord>,
    pub layer_probs: Vec<LayerProbRecord>,
}

impl Dump {
    pub fn new(header: DumpHeader) -> Self {
        Dump { header, embeddings: Vec::new(), ablations: Vec::new(), layer_probs: Vec::new() }
    }
}

pub fn encode_vec(v: &[f64]) -> String {
    let bytes: Vec<u8> = v.iter().flat_map(|&x| (x as f32).to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

pub fn decode_vec(s: &str) -> Result<Vec<f64>, String> {
    let bytes = STANDARD.decode(s).map_err(|e| e.to_string())?;
    if bytes.len() % 4 != 0 {
        return Err(format!("payload of {} bytes is not a whole number of f32 values", bytes.len()));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

fn schema(line: usize, message: impl Into<String>) -> AnalysisError {
    AnalysisError::Schema { line, message: message.into() }
}

fn check_prob(p: f64, what: &str, line: usize) -> Result<(), AnalysisError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(schema(line, format!("{what} = {p} outside [0, 1]")))
    }
}

pub fn parse_dump(text: &str) -> Result<Dump, AnalysisError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| schema(1, "missing header"))?;
    let header: DumpHeader =
        serde_json::from_str(first).map_err(|e| schema(1, format!("bad header: {e}")))?;
    let mut dump = Dump::new(header);
    for (i, line) in lines {
        let n = i + 1;
        let raw: RawRecord = serde_json::from_str(line)
            .map_err(|e| schema(n, format!("unrecognized record: {e}")))?;
        let h = &dump.header;
        match raw {
            RawRecord::Embedding(r) => {
                let vec = decode_vec(&r.vec_b64).map_err(|e| schema(n, e))?;
                if vec.len() != h.d_model {
                    return Err(schema(n, format!("width {} != d_model {}", vec.len(), h.d_model)));
                }
                if r.layer > h.n_layers {
                    return Err(schema(n, format!("layer {} > n_layers {}", r.layer, h.n_layers)));
                }
                dump.embeddings.push(EmbeddingRecord {
                    sentence_id: r.sid,
                    checkpoint: h.revision.clone(),
                    layer: r.layer,
                    pooling: r.pooling,
                    vec,
                });
            }
            RawRecord::Ablation(r) => {
                check_prob(r.p_clean, "p_clean", n)?;
                check_prob(r.p_ablated, "p_ablated", n)?;
                if r.component.layer() >= h.n_layers {
                    return Err(schema(n, format!("component {} beyond {} layers", r.component, h.n_layers)));
                }
                if let Component::Attn { head, .. } = r.component {
                    if head >= h.n_heads {
                        return Err(schema(n, format!("head {head} >= n_heads {}", h.n_heads)));
                    }
                }
                dump.ablations.push(r);
            }
            RawRecord::LayerProb(r) => {
                check_prob(r.p_target, "p_target", n)?;
                if r.layer > h.n_layers {
                    return Err(schema(n, format!("layer {} > n_layers {}", r.layer, h.n_layers)));
                }
                dump.layer_probs.push(r);
            }
        }
    }
    Ok(dump)
}

pub fn read_dump(path: &Path) -> Result<Dump, AnalysisError> {
    parse_dump(&fs::read_to_string(path)?)
}

pub fn write_dump(dump: &Dump, path: &Path) -> Result<(), AnalysisError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", json(&dump.header))?;
    for e in &dump.embeddings {
        let raw = RawEmbedding {
            sid: e.sentence_id.clone(),
            layer: e.layer,
            pooling: e.pooling,
            vec_b64: encode_vec(&e.vec),
        };
        writeln!(w, "{}", json(&raw))?;
    }
    for a in &dump.ablations {
        writeln!(w, "{}", json(a))?;
    }
    for p in &dump.layer_probs {
        writeln!(w, "{}", json(p))?;
    }
    w.flush()?;
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("dump records serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> DumpHeader {
        DumpHeader {
            model_id: "tiny".into(),
            revision: "step64000".into(),
            d_model: 3,
            n_layers: 2,
            n_heads: 2,
            pooling: vec![Pooling::Mean],
            tokenizer_hash: "abc".into(),
        }
    }

    #[test]
    fn f32_payload_round_trip() {
        let v = vec![1.5, -0.25, 3.0e-7f32 as f64, f32::MAX as f64];
        assert_eq!(decode_vec(&encode_vec(&v)).unwrap(), v);
        assert!(decode_vec("AAA=").is_err());
    }

    #[test]
    fn dump_round_trip() {
        let mut d = Dump::new(header());
        d.embeddings.push(EmbeddingRecord {
            sentence_id: "A-00000/input".into(),
            checkpoint: "step64000".into(),
            layer: 2,
            pooling: Pooling::Mean,
            vec: vec![1.0, 2.0, 3.0],
        });
        d.ablations.push(AblationRecord {
            sentence_id: "s".into(),
            component: Component::Attn { layer: 1, head: 1 },
            p_clean: 0.5,
            p_ablated: 0.25,
            target_token: 7,
        });
        d.ablations.push(AblationRecord {
            sentence_id: "s".into(),
            component: Component::Mlp { layer: 0 },
            p_clean: 0.5,
            p_ablated: 0.5,
            target_token: 7,
        });
        d.layer_probs.push(LayerProbRecord { sentence_id: "s".into(), layer: 0, p_target: 0.1 });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.adf");
        write_dump(&d, &path).unwrap();
        assert_eq!(read_dump(&path).unwrap(), d);
        assert_eq!(d.header.step(), Some(64000));
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let h = serde_json::to_string(&header()).unwrap();
        let bad_width = format!("{h}\n{{\"sid\":\"x\",\"layer\":0,\"pooling\":\"mean\",\"vec_b64\":\"{}\"}}", encode_vec(&[1.0]));
        assert!(matches!(parse_dump(&bad_width), Err(AnalysisError::Schema { line: 2, .. })));
        let bad_prob = format!("{h}\n{{\"sid\":\"x\",\"layer\":0,\"p_target\":1.5}}");
        assert!(matches!(parse_dump(&bad_prob), Err(AnalysisError::Schema { line: 2, .. })));
        let bad_head = format!(
            "{h}\n{{\"sid\":\"x\",\"component\":{{\"kind\":\"attn\",\"layer\":0,\"head\":9}},\"p_clean\":0.5,\"p_ablated\":0.5,\"target\":1}}"
        );
        assert!(matches!(parse_dump(&bad_head), Err(AnalysisError::Schema { line: 2, .. })));
        let unknown = format!("{h}\n{{\"what\":1}}");
        assert!(matches!(parse_dump(&unknown), Err(AnalysisError::Schema { line: 2, .. })));
        assert!(matches!(parse_dump(""), Err(AnalysisError::Schema { line: 1, .. })));
    }
}
