use std::collections::HashSet;

use super::DatasetRecord;

/// Lowercased word tokens with sentence punctuation stripped.
pub fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| matches!(c, '.' | ',' | '?' | '!' | ';')).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Streaming quality filter: case-insensitive input dedup, adjacent
/// repeated tokens, and tokens outside the lexicon vocabulary.
pub struct RecordFilter<'v> {
    vocab: &'v HashSet<String>,
    dedup: bool,
    seen: HashSet<String>,
}

impl<'v> RecordFilter<'v> {
    pub fn new(vocab: &'v HashSet<String>, dedup: bool) -> Self {
        RecordFilter { vocab, dedup, seen: HashSet::new() }
    }

    fn sentence_ok(&self, text: &str) -> bool {
        let toks = tokens(text);
        !toks.windows(2).any(|w| w[0] == w[1]) && toks.iter().all(|t| self.vocab.contains(t))
    }

    /// Returns whether `rec` passes; accepted inputs are remembered.
    pub fn accept(&mut self, rec: &DatasetRecord) -> bool {
        let texts = std::iter::once(&rec.input)
            .chain(&rec.intermediates)
            .chain(std::iter::once(&rec.output));
        for text in texts {
            if !self.sentence_ok(text) {
                return false;
            }
        }
        !self.dedup || self.seen.insert(rec.input.to_lowercase())
    }
}

pub fn filter_records(records: Vec<DatasetRecord>, vocab: &HashSet<String>) -> Vec<DatasetRecord> {
    let mut filter = RecordFilter::new(vocab, true);
    records.into_iter().filter(|r| filter.accept(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasetgen::Split;

    fn rec(input: &str) -> DatasetRecord {
        DatasetRecord {
            id: "A-00000".into(),
            labels: vec!['H'],
            transform_names: vec!["i_movement".into()],
            input: input.into(),
            intermediates: vec![],
            output: "Is the cat happy?".into(),
            words: vec![],
            seed: 0,
            split: Split::Train,
        }
    }

    #[test]
    fn tokens_strip_punctuation() {
        assert_eq!(tokens("The students; can; solve it."), ["the", "students", "can", "solve", "it"]);
    }

    #[test]
    fn filters() {
        let vocab: HashSet<String> =
            ["the", "cat", "is", "happy"].iter().map(|s| s.to_string()).collect();
        let kept = filter_records(
            vec![
                rec("The cat is happy."),
                rec("the cat is happy."),
                rec("The the cat is happy."),
                rec("The dog is happy."),
            ],
            &vocab,
        );
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].input, "The cat is happy.");
    }
}
