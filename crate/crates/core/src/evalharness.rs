//! Scoring of model completions against gold dataset records.
//!
//! Counts are kept as integers; percentages are rendered from the counts
//! with integer arithmetic so a report can be recomputed exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasetgen::{read_jsonl, DatasetError, DatasetRecord, Split};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction for unknown record `{0}`")]
    UnknownRecordId(String),
    #[error("more than one prediction for record `{0}`")]
    DuplicatePrediction(String),
    #[error("{path} line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub record_id: String,
    pub text: String,
}

/// Lowercased tokens with terminal punctuation stripped.
pub fn normalize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_end_matches(['.', '?', '!', ',', ';', ':']).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn exact_match(pred: &str, gold: &str) -> bool {
    pred.trim() == gold.trim()
}

fn overlap(pred: &str, gold: &str) -> (usize, usize) {
    let a: BTreeSet<String> = normalize(pred).into_iter().collect();
    let b: BTreeSet<String> = normalize(gold).into_iter().collect();
    (a.intersection(&b).count(), a.union(&b).count())
}

/// Token-set Jaccard similarity; two empty sentences score 1.0.
pub fn jaccard(pred: &str, gold: &str) -> f64 {
    match overlap(pred, gold) {
        (_, 0) => 1.0,
        (i, u) => i as f64 / u as f64,
    }
}

/// `jaccard >= 0.8`, decided on the integer counts.
pub fn partial_match(pred: &str, gold: &str) -> bool {
    match overlap(pred, gold) {
        (_, 0) => true,
        (i, u) => 5 * i >= 4 * u,
    }
}

const MARKERS: [&str; 2] = ["Intermediate:", "Output:"];

/// Splits a completion on newlines and on the prompt markers.
pub fn segments(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for line in text.lines() {
        let mut rest = line;
        loop {
            let next = MARKERS
                .iter()
                .filter_map(|m| rest.find(m).map(|i| (i, m.len())))
                .min();
            match next {
                Some((i, len)) => {
                    out.push(&rest[..i]);
                    rest = &rest[i + len..];
                }
                None => {
                    out.push(rest);
                    break;
                }
            }
        }
    }
    out.into_iter().map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// The final answer of a completion: the text after the last `Output:`
/// marker, or the first non-empty segment when there is none.
pub fn final_answer(text: &str) -> &str {
    match text.rfind("Output:") {
        Some(i) => text[i + "Output:".len()..].lines().next().unwrap_or("").trim(),
        None => segments(text).first().copied().unwrap_or(""),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NestedScore {
    pub exact: bool,
    pub partial: bool,
}

/// Every gold output must appear as a segment (exact), or be matched by
/// some segment at Jaccard ≥ 0.8 (partial).
pub fn eval_nested(pred_text: &str, gold_outputs: &[String]) -> NestedScore {
    let segs = segments(pred_text);
    NestedScore {
        exact: gold_outputs.iter().all(|g| segs.iter().any(|s| exact_match(s, g))),
        partial: gold_outputs.iter().all(|g| segs.iter().any(|s| partial_match(s, g))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bucket {
    Single,
    Double,
    DoubleWithIntermediate,
    Ood,
    OodWithIntermediate,
}

impl Bucket {
    pub const ALL: [Bucket; 5] = [
        Bucket::Single,
        Bucket::Double,
        Bucket::DoubleWithIntermediate,
        Bucket::Ood,
        Bucket::OodWithIntermediate,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Bucket::Single => "Single transformation",
            Bucket::Double => "Double transformation",
            Bucket::DoubleWithIntermediate => "Double transformation (with intermediate)",
            Bucket::Ood => "OOD combination",
            Bucket::OodWithIntermediate => "OOD combination (with intermediate)",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub n: u64,
    pub exact: u64,
    pub partial: u64,
}

impl Counts {
    fn add(&mut self, exact: bool, partial: bool) {
        self.n += 1;
        self.exact += exact as u64;
        self.partial += partial as u64;
    }

    fn merge(&mut self, other: &Counts) {
        self.n += other.n;
        self.exact += other.exact;
        self.partial += other.partial;
    }

    pub fn exact_ratio(&self) -> Option<f64> {
        (self.n > 0).then(|| self.exact as f64 / self.n as f64)
    }

    pub fn partial_ratio(&self) -> Option<f64> {
        (self.n > 0).then(|| self.partial as f64 / self.n as f64)
    }
}

/// `num / den` as a percentage with two decimals, rounded half up.
pub fn percent(num: u64, den: u64) -> Option<String> {
    if den == 0 {
        return None;
    }
    let basis = (num as u128 * 20_000 + den as u128) / (2 * den as u128);
    Some(format!("{}.{:02}", basis / 100, basis % 100))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvalReport {
    pub buckets: BTreeMap<Bucket, Counts>,
    /// Counts per bucket and label sequence (`A`, `C+H`, ...).
    pub by_sequence: BTreeMap<(Bucket, String), Counts>,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    bucket: Bucket,
    sequence: Option<&'a str>,
    n: u64,
    exact: u64,
    partial: u64,
    exact_pct: Option<String>,
    partial_pct: Option<String>,
}

impl<'a> JsonRow<'a> {
    fn new(bucket: Bucket, sequence: Option<&'a str>, c: &Counts) -> Self {
        JsonRow {
            bucket,
            sequence,
            n: c.n,
            exact: c.exact,
            partial: c.partial,
            exact_pct: percent(c.exact, c.n),
            partial_pct: percent(c.partial, c.n),
        }
    }
}

impl EvalReport {
    fn record(&mut self, bucket: Bucket, seq: &str, exact: bool, partial: bool) {
        self.buckets.entry(bucket).or_default().add(exact, partial);
        self.by_sequence.entry((bucket, seq.to_string())).or_default().add(exact, partial);
    }

    fn merge(mut self, other: EvalReport) -> EvalReport {
        for (k, v) in &other.buckets {
            self.buckets.entry(*k).or_default().merge(v);
        }
        for (k, v) in &other.by_sequence {
            self.by_sequence.entry(k.clone()).or_default().merge(v);
        }
        self
    }

    pub fn bucket(&self, b: Bucket) -> Counts {
        self.buckets.get(&b).copied().unwrap_or_default()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let buckets: Vec<JsonRow> =
            Bucket::ALL.iter().map(|&b| JsonRow::new(b, None, &self.bucket(b))).collect();
        let by_sequence: Vec<JsonRow> = self
            .by_sequence
            .iter()
            .map(|((b, s), c)| JsonRow::new(*b, Some(s), c))
            .collect();
        serde_json::json!({
            "metric": { "exact": "trimmed string equality", "partial": "token-set jaccard >= 0.8" },
            "buckets": buckets,
            "by_sequence": by_sequence,
        })
    }

    pub fn to_markdown(&self) -> String {
        let cell = |p: Option<String>| p.map(|s| format!("{s}%")).unwrap_or_else(|| "n/a".into());
        let mut out = String::from("| Setting | n | Exact match | Partial match |\n|---|---:|---:|---:|\n");
        for b in Bucket::ALL {
            let c = self.bucket(b);
            writeln!(out, "| {} | {} | {} | {} |", b, c.n, cell(percent(c.exact, c.n)), cell(percent(c.partial, c.n)))
                .unwrap();
        }
        out.push_str("\n| Setting | Sequence | n | Exact match | Partial match |\n|---|---|---:|---:|---:|\n");
        for ((b, s), c) in &self.by_sequence {
            writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                b,
                s,
                c.n,
                cell(percent(c.exact, c.n)),
                cell(percent(c.partial, c.n))
            )
            .unwrap();
        }
        out
    }
}

fn score_record(rec: &DatasetRecord, text: &str) -> EvalReport {
    let mut report = EvalReport::default();
    let seq = rec.label_key();
    let answer = final_answer(text);
    let exact = exact_match(answer, &rec.output);
    let partial = partial_match(answer, &rec.output);
    if !rec.is_nested() {
        report.record(Bucket::Single, &seq, exact, partial);
        return report;
    }
    let (plain, with_mid) = if rec.split == Split::Ood {
        (Bucket::Ood, Bucket::OodWithIntermediate)
    } else {
        (Bucket::Double, Bucket::DoubleWithIntermediate)
    };
    report.record(plain, &seq, exact, partial);
    let mut golds = rec.intermediates.clone();
    golds.push(rec.output.clone());
    let nested = eval_nested(text, &golds);
    report.record(with_mid, &seq, nested.exact, nested.partial);
    report
}

/// Scores predictions against gold records. Gold records without a
/// prediction count as misses.
///
/// Single-rule records fill `Single`. Every nested record is scored twice:
/// on its final answer alone (`Double` / `Ood`) and on containment of the
/// intermediate and final outputs (`...WithIntermediate`).
pub fn score(gold: &[DatasetRecord], preds: &[Prediction]) -> Result<EvalReport, EvalError> {
    let index: HashMap<&str, usize> = gold.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    let mut texts: Vec<Option<&str>> = vec![None; gold.len()];
    for p in preds {
        let &i = index
            .get(p.record_id.as_str())
            .ok_or_else(|| EvalError::UnknownRecordId(p.record_id.clone()))?;
        if texts[i].replace(&p.text).is_some() {
            return Err(EvalError::DuplicatePrediction(p.record_id.clone()));
        }
    }
    Ok(gold
        .par_iter()
        .zip(texts.par_iter())
        .map(|(rec, text)| score_record(rec, text.unwrap_or("")))
        .reduce(EvalReport::default, EvalReport::merge))
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>, EvalError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(p);
    }
    Ok(out)
}

pub fn score_file(pred_path: &Path, gold_path: &Path) -> Result<EvalReport, EvalError> {
    let gold = read_jsonl(gold_path)?;
    let preds = read_predictions(pred_path)?;
    score(&gold, &preds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize("The exams were graded by the teacher."),
            ["the", "exams", "were", "graded", "by", "the", "teacher"]
        );
        assert_eq!(normalize("Can she swim?"), ["can", "she", "swim"]);
        assert!(normalize("").is_empty());
    }

    #[test]
    fn exact_examples() {
        assert!(exact_match("Can she swim?", "Can she swim?"));
        assert!(!exact_match("can she swim?", "Can she swim?"));
        assert!(exact_match("  Can she swim?\n", "Can she swim?"));
    }

    #[test]
    fn jaccard_examples() {
        let gold = "a b c d e f g h i j";
        assert_eq!(jaccard(gold, gold), 1.0);
        assert_eq!(jaccard("x y", "z w"), 0.0);
        assert_eq!(jaccard("", ""), 1.0);
        let pred = "a b c d e f g h i k";
        assert!((jaccard(pred, gold) - 9.0 / 11.0).abs() < 1e-12);
        assert!(partial_match(pred, gold));
        // 4 of 5
        assert!(partial_match("a b c d", "a b c d e"));
        // 15 of 19 ≈ 0.789
        let g: Vec<String> = (0..19).map(|i| format!("w{i}")).collect();
        let p: Vec<String> = (0..15).map(|i| format!("w{i}")).collect();
        assert!(!partial_match(&p.join(" "), &g.join(" ")));
    }

    #[test]
    fn segmenting() {
        assert_eq!(
            segments("The muffin was taken away.\nOutput: Was it?"),
            ["The muffin was taken away.", "Was it?"]
        );
        assert_eq!(segments(" x Intermediate: y Output: z"), ["x", "y", "z"]);
        assert_eq!(final_answer("mid\nOutput: Was it?\n"), "Was it?");
        assert_eq!(final_answer("\n Is it? \n"), "Is it?");
    }

    #[test]
    fn nested_examples() {
        let golds = vec!["a b c d e f g.".to_string(), "Final one.".to_string()];
        assert!(eval_nested("a b c d e f g.\nOutput: Final one.", &golds).exact);
        assert!(!eval_nested("Final one.", &golds).exact);
        let near = eval_nested("a b c d e f x.\nOutput: Final one.", &golds);
        // 6 of 8 is 0.75: not partial
        assert!(!near.exact && !near.partial);
        let golds = vec!["a b c d e f g h i j k l m n o p q.".to_string(), "Final one.".to_string()];
        let near = eval_nested("a b c d e f g h i j k l m n o p z.\nOutput: Final one.", &golds);
        assert!(!near.exact && near.partial);
    }

    #[test]
    fn percent_rounding() {
        assert_eq!(percent(1, 3).unwrap(), "33.33");
        assert_eq!(percent(2, 3).unwrap(), "66.67");
        assert_eq!(percent(1, 8).unwrap(), "12.50");
        assert_eq!(percent(1, 800).unwrap(), "0.13");
        assert_eq!(percent(5, 5).unwrap(), "100.00");
        assert_eq!(percent(0, 0), None);
    }

    fn rec(id: &str, labels: &[char], split: Split) -> DatasetRecord {
        DatasetRecord {
            id: id.into(),
            labels: labels.to_vec(),
            transform_names: vec![],
            input: "In.".into(),
            intermediates: (1..labels.len()).map(|i| format!("Mid {i}.")).collect(),
            output: format!("Out {id}."),
            words: vec![],
            seed: 0,
            split,
        }
    }

    #[test]
    fn score_gold_and_errors() {
        let gold = vec![
            rec("A-0", &['A'], Split::Val),
            rec("C+H-0", &['C', 'H'], Split::Val),
            rec("A+H-0", &['A', 'H'], Split::Ood),
        ];
        let preds: Vec<Prediction> = gold
            .iter()
            .map(|r| {
                let mut text = String::new();
                for m in &r.intermediates {
                    text.push_str(&format!("{m}\nOutput: "));
                }
                text.push_str(&r.output);
                Prediction { record_id: r.id.clone(), text }
            })
            .collect();
        let report = score(&gold, &preds).unwrap();
        for b in Bucket::ALL {
            let c = report.bucket(b);
            assert_eq!((c.n, c.exact, c.partial), (1, 1, 1), "{b}");
        }
        let empty = score(&gold, &[]).unwrap();
        assert_eq!(empty.bucket(Bucket::Single).exact, 0);
        let unknown = vec![Prediction { record_id: "nope".into(), text: String::new() }];
        assert!(matches!(score(&gold, &unknown), Err(EvalError::UnknownRecordId(_))));
        let dup = vec![preds[0].clone(), preds[0].clone()];
        assert!(matches!(score(&gold, &dup), Err(EvalError::DuplicatePrediction(_))));
        assert!(report.to_markdown().contains("| Single transformation | 1 | 100.00% | 100.00% |"));
    }
}
