use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{render_prompt, Corpus, DatasetError, DatasetRecord, PromptMode, Split, SplitConfig};
use crate::transforms::{letter_map, CompatibilityMatrix, TransformId};
use crate::GENERATOR_VERSION;

pub const DATASET_KIND: &str = "tgforge-dataset";

/// First line of every dataset JSONL file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub kind: String,
    pub generator: String,
    pub letters: BTreeMap<char, String>,
}

impl Default for DatasetHeader {
    fn default() -> Self {
        DatasetHeader {
            kind: DATASET_KIND.to_string(),
            generator: GENERATOR_VERSION.to_string(),
            letters: letter_map().into_iter().map(|(c, n)| (c, n.to_string())).collect(),
        }
    }
}

/// Writes a header line followed by one record per line. Returns the
/// number of records written.
pub fn write_jsonl<'r>(
    records: impl IntoIterator<Item = &'r DatasetRecord>,
    path: &Path,
) -> Result<usize, DatasetError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer(&mut w, &DatasetHeader::default()).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    let mut n = 0;
    for rec in records {
        serde_json::to_writer(&mut w, rec).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

fn schema(line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Schema { line, message: message.into() }
}

fn check_record(rec: &DatasetRecord, line: usize) -> Result<(), DatasetError> {
    if rec.labels.is_empty() {
        return Err(schema(line, "labels is empty"));
    }
    let rules: Vec<TransformId> = rec
        .labels
        .iter()
        .map(|&c| TransformId::from_letter(c).ok_or_else(|| schema(line, format!("unknown label `{c}`"))))
        .collect::<Result<_, _>>()?;
    let names: Vec<&str> = rules.iter().map(|r| r.name()).collect();
    if rec.transform_names != names {
        return Err(schema(line, "transform_names do not match labels"));
    }
    if rec.intermediates.len() + 1 != rec.labels.len() {
        return Err(schema(
            line,
            format!(
                "{} intermediates for {} labels",
                rec.intermediates.len(),
                rec.labels.len()
            ),
        ));
    }
    if rec.input.is_empty() || rec.output.is_empty() {
        return Err(schema(line, "empty input or output"));
    }
    Ok(())
}

/// Reads and validates a dataset file written by [`write_jsonl`].
pub fn read_jsonl(path: &Path) -> Result<Vec<DatasetRecord>, DatasetError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let header_line = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(schema(1, "missing header")),
    };
    let header: DatasetHeader =
        serde_json::from_str(&header_line).map_err(|e| schema(1, format!("bad header: {e}")))?;
    if header.kind != DATASET_KIND {
        return Err(schema(1, format!("unexpected kind `{}`", header.kind)));
    }
    if header.letters != DatasetHeader::default().letters {
        return Err(schema(1, "letter mapping differs from this build"));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DatasetRecord =
            serde_json::from_str(&line).map_err(|e| schema(i + 1, e.to_string()))?;
        check_record(&rec, i + 1)?;
        out.push(rec);
    }
    Ok(out)
}

fn write_prompts<'r>(
    records: impl Iterator<Item = &'r DatasetRecord>,
    mode: PromptMode,
    with_intermediate: bool,
    txt: &Path,
    jsonl: &Path,
) -> Result<(), DatasetError> {
    let mut blocks = Vec::new();
    let mut index = BufWriter::new(fs::File::create(jsonl)?);
    for rec in records {
        let prompt = render_prompt(rec, mode, with_intermediate);
        let row = serde_json::json!({ "record_id": rec.id, "prompt": prompt });
        writeln!(index, "{row}")?;
        blocks.push(prompt);
    }
    index.flush()?;
    let mut text = blocks.join("\n\n");
    text.push('\n');
    fs::write(txt, text)?;
    Ok(())
}

/// Writes the on-disk dataset layout under `dir` and returns every file
/// created, in a stable order.
pub fn write_corpus(
    dir: &Path,
    corpus: &Corpus,
    cfg: &SplitConfig,
    matrix: &CompatibilityMatrix,
) -> Result<Vec<PathBuf>, DatasetError> {
    fs::create_dir_all(dir.join("splits"))?;
    fs::create_dir_all(dir.join("prompts"))?;
    let mut files = Vec::new();
    for (rule, recs) in &corpus.single {
        let path = dir.join(format!("single_{}.jsonl", rule.name()));
        write_jsonl(recs, &path)?;
        files.push(path);
    }
    for (seq, recs) in &corpus.nested {
        let names: Vec<&str> = seq.0.iter().map(|r| r.name()).collect();
        let path = dir.join(format!("nested_{}.jsonl", names.join("_")));
        write_jsonl(recs, &path)?;
        files.push(path);
    }
    for split in [Split::Train, Split::Val, Split::Ood] {
        let path = dir.join("splits").join(format!("{}.jsonl", split.name()));
        write_jsonl(corpus.records().filter(|r| r.split == split), &path)?;
        files.push(path);
    }
    let prompts = dir.join("prompts");
    write_prompts(
        corpus.records().filter(|r| r.split == Split::Train),
        PromptMode::Train,
        cfg.with_intermediates,
        &prompts.join("train.txt"),
        &prompts.join("train.jsonl"),
    )?;
    write_prompts(
        corpus.records().filter(|r| r.split != Split::Train),
        PromptMode::Inference,
        cfg.with_intermediates,
        &prompts.join("inference.txt"),
        &prompts.join("inference.jsonl"),
    )?;
    for name in ["train.txt", "train.jsonl", "inference.txt", "inference.jsonl"] {
        files.push(prompts.join(name));
    }
    let csv = dir.join("compatibility.csv");
    fs::write(&csv, matrix.to_csv())?;
    files.push(csv);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec() -> DatasetRecord {
        DatasetRecord {
            id: "A+H-00000".into(),
            labels: vec!['A', 'H'],
            transform_names: vec!["np_passive_1".into(), "i_movement".into()],
            input: "The teacher graded the exams.".into(),
            intermediates: vec!["The exams were graded by the teacher.".into()],
            output: "Were the exams graded by the teacher?".into(),
            words: vec!["teacher".into(), "grade".into(), "exam".into()],
            seed: 42,
            split: Split::Ood,
        }
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let recs = vec![rec()];
        assert_eq!(write_jsonl(&recs, &path).unwrap(), 1);
        assert_eq!(read_jsonl(&path).unwrap(), recs);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.lines().next().unwrap().contains("\"A\":\"np_passive_1\""));
    }

    #[test]
    fn intermediate_count_mismatch_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let mut bad = rec();
        bad.intermediates.clear();
        write_jsonl(&[bad], &path).unwrap();
        match read_jsonl(&path) {
            Err(DatasetError::Schema { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let header = serde_json::to_string(&DatasetHeader::default()).unwrap();
        fs::write(&path, format!("{header}\n{{\"id\":\"x\",\"bogus\":1}}\n")).unwrap();
        assert!(matches!(read_jsonl(&path), Err(DatasetError::Schema { line: 2, .. })));
    }
}
