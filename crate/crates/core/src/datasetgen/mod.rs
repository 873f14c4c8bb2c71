//! Deterministic corpus generation.
//!
//! Every candidate sentence is drawn from a per-candidate seed derived from
//! the master seed, the rule (or rule sequence) and the attempt index. The
//! seed is stored on the record, so `(labels[0], seed)` regenerates the base
//! clause exactly.

mod filter;
mod io;
mod prompt;
mod split;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use filter::{filter_records, tokens, RecordFilter};
pub use io::{read_jsonl, write_corpus, write_jsonl, DatasetHeader, DATASET_KIND};
pub use prompt::{render_prompt, PromptMode};
pub use split::{assign_splits, make_splits, SplitConfig};

use crate::lexicon::{Category, Lexicon, Number};
use crate::rng::{derive_seed, seeded};
use crate::syntax::{build_clause, render, Binding, Clause, RenderError, TemplateSet};
use crate::transforms::{
    apply_rule, build_compatibility_matrix, compose, join_letters, parse_sequence,
    CompatibilityMatrix, CompositionStatus, TransformId,
};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{label}: only {produced} of {requested} records could be generated")]
    GenerationExhausted {
        label: String,
        requested: usize,
        produced: usize,
    },
    #[error("{0} cannot be composed (compatibility entry is 0)")]
    IncompatiblePair(String),
    #[error("nested sequences must have exactly two rules, got `{0}`")]
    InvalidSequence(String),
    #[error("no nested records for OOD combination {0}")]
    MissingOodPair(String),
    #[error("no templates for {0}")]
    NoTemplates(TransformId),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Ood,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Ood => "ood",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub id: String,
    pub labels: Vec<char>,
    pub transform_names: Vec<String>,
    pub input: String,
    pub intermediates: Vec<String>,
    pub output: String,
    pub words: Vec<String>,
    pub seed: u64,
    pub split: Split,
}

impl DatasetRecord {
    pub fn rules(&self) -> Option<Vec<TransformId>> {
        self.labels.iter().map(|&c| TransformId::from_letter(c)).collect()
    }

    pub fn label_key(&self) -> String {
        self.labels.iter().map(char::to_string).collect::<Vec<_>>().join("+")
    }

    pub fn is_nested(&self) -> bool {
        self.labels.len() > 1
    }
}

/// A rule sequence, written `A+H` in config files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleSeq(pub Vec<TransformId>);

impl fmt::Display for RuleSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_letters(&self.0))
    }
}

impl FromStr for RuleSeq {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sequence(s).map(RuleSeq)
    }
}

impl Serialize for RuleSeq {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RuleSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The eight nested sequences of the reference dataset, in application order.
pub fn default_nested() -> Vec<RuleSeq> {
    ["D+G", "F+H", "C+H", "B+H", "D+A", "I+H", "G+A", "F+C"]
        .iter()
        .map(|s| s.parse().expect("valid sequence"))
        .collect()
}

/// Default OOD combinations; generated alongside the in-distribution pairs.
pub fn default_ood() -> Vec<RuleSeq> {
    ["A+H", "E+H"].iter().map(|s| s.parse().expect("valid sequence")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenSpec {
    pub seed: u64,
    pub single_count: usize,
    pub nested_count: usize,
    /// Per-rule overrides of `single_count`, keyed by rule name.
    pub single_counts: BTreeMap<TransformId, usize>,
    /// Nested sequences to generate; OOD combinations are added if missing.
    pub nested: Vec<RuleSeq>,
    pub dedup: bool,
    pub split: SplitConfig,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            seed: 0,
            single_count: 2000,
            nested_count: 500,
            single_counts: BTreeMap::new(),
            nested: default_nested(),
            dedup: true,
            split: SplitConfig::default(),
        }
    }
}

impl GenSpec {
    /// Reduced scale used by tests and the acceptance suite.
    pub fn desk_scale(seed: u64) -> Self {
        GenSpec { seed, single_count: 200, nested_count: 50, ..GenSpec::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.single_count == 0 {
            return Err("single_count must be at least 1".into());
        }
        if self.nested_count == 0 {
            return Err("nested_count must be at least 1".into());
        }
        if let Some((rule, _)) = self.single_counts.iter().find(|(_, &n)| n == 0) {
            return Err(format!("single_counts.{rule} must be at least 1"));
        }
        self.split.validate()
    }

    pub fn single_target(&self, rule: TransformId) -> usize {
        self.single_counts.get(&rule).copied().unwrap_or(self.single_count)
    }

    /// Nested sequences with every OOD combination included once.
    pub fn all_nested(&self) -> Vec<RuleSeq> {
        let mut seqs = self.nested.clone();
        for ood in &self.split.ood_combinations {
            if !seqs.contains(ood) {
                seqs.push(ood.clone());
            }
        }
        seqs
    }
}

/// Generated records grouped the way they are written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub single: BTreeMap<TransformId, Vec<DatasetRecord>>,
    pub nested: Vec<(RuleSeq, Vec<DatasetRecord>)>,
}

impl Corpus {
    pub fn records(&self) -> impl Iterator<Item = &DatasetRecord> {
        self.single.values().flatten().chain(self.nested.iter().flat_map(|(_, r)| r))
    }

    pub fn records_mut(&mut self) -> impl Iterator<Item = &mut DatasetRecord> {
        self.single
            .values_mut()
            .flatten()
            .chain(self.nested.iter_mut().flat_map(|(_, r)| r))
    }
}

/// Consecutive rejected candidates tolerated before giving up.
const STALL_LIMIT: usize = 20_000;
/// Candidates per rule used to estimate the compatibility matrix.
const COMPAT_SAMPLES: usize = 300;

pub struct Generator<'a> {
    lex: &'a Lexicon,
    templates: &'a TemplateSet,
    dedup: bool,
    filter_vocab: std::collections::HashSet<String>,
    matrix: OnceLock<CompatibilityMatrix>,
}

impl<'a> Generator<'a> {
    pub fn new(lex: &'a Lexicon, templates: &'a TemplateSet) -> Self {
        Generator {
            lex,
            templates,
            dedup: true,
            filter_vocab: lex.vocabulary(),
            matrix: OnceLock::new(),
        }
    }

    pub fn with_dedup(mut self, dedup: bool) -> Self {
        self.dedup = dedup;
        self
    }

    pub fn lexicon(&self) -> &Lexicon {
        self.lex
    }

    fn new_filter(&self) -> RecordFilter<'_> {
        RecordFilter::new(&self.filter_vocab, self.dedup)
    }

    /// Builds the base clause a candidate seed stands for. `None` when the
    /// draw binds the same lemma to two noun slots.
    pub fn base_clause(&self, rule: TransformId, seed: u64) -> Option<(Clause, Vec<String>)> {
        let templates = self.templates.for_rule(rule);
        if templates.is_empty() {
            return None;
        }
        let mut rng = seeded(seed);
        let template = templates[rng.random_range(0..templates.len())];
        let free = template.free_number_slots();
        let mut bindings = HashMap::new();
        let mut words = Vec::with_capacity(template.slots.len());
        let mut nominal = Vec::new();
        for slot in &template.slots {
            let pick = self.lex.sample_words(&slot.filter, 1, rng.random()).ok()?;
            let lexeme = pick[0];
            if matches!(lexeme.category, Category::Noun | Category::ProperNoun | Category::Pronoun) {
                if nominal.contains(&lexeme.lemma) {
                    return None;
                }
                nominal.push(lexeme.lemma.clone());
            }
            let number = free.contains(&slot.name).then(|| {
                if rng.random_bool(0.5) {
                    Number::Sg
                } else {
                    Number::Pl
                }
            });
            words.push(lexeme.lemma.clone());
            bindings.insert(slot.name.clone(), Binding { lemma: lexeme.lemma.clone(), number });
        }
        build_clause(self.lex, template, &bindings).ok().map(|c| (c, words))
    }

    fn space_bound(&self, rule: TransformId) -> u128 {
        self.templates
            .for_rule(rule)
            .iter()
            .fold(0u128, |acc, t| acc.saturating_add(t.space_size(self.lex)))
    }

    /// Compatibility matrix over a fixed-seed sample of every Ω bucket.
    pub fn compatibility(&self) -> &CompatibilityMatrix {
        self.matrix.get_or_init(|| {
            let corpus: BTreeMap<TransformId, Vec<Clause>> = TransformId::ALL
                .iter()
                .map(|&rule| {
                    let seed = derive_seed(0, &format!("compat/{}", rule.name()));
                    let clauses = (0..COMPAT_SAMPLES as u64)
                        .filter_map(|i| self.base_clause(rule, derive_seed(seed, &i.to_string())))
                        .map(|(c, _)| c)
                        .collect();
                    (rule, clauses)
                })
                .collect();
            build_compatibility_matrix(&corpus).expect("every rule has templates")
        })
    }

    pub fn generate_single(
        &self,
        rule: TransformId,
        n: usize,
        seed: u64,
    ) -> Result<Vec<DatasetRecord>, DatasetError> {
        if self.templates.for_rule(rule).is_empty() {
            return Err(DatasetError::NoTemplates(rule));
        }
        let label = rule.name().to_string();
        if n as u128 > self.space_bound(rule) {
            return Err(DatasetError::GenerationExhausted { label, requested: n, produced: 0 });
        }
        let rule_seed = derive_seed(seed, &format!("single/{}", rule.name()));
        self.collect(&label, n, |attempt| {
            let cand_seed = derive_seed(rule_seed, &attempt.to_string());
            let Some((clause, words)) = self.base_clause(rule, cand_seed) else {
                return Ok(None);
            };
            let output = apply_rule(rule, &clause).expect("template clauses are in their rule's domain");
            Ok(Some(DatasetRecord {
                id: String::new(),
                labels: vec![rule.letter()],
                transform_names: vec![rule.name().to_string()],
                input: render(self.lex, &clause)?.text,
                intermediates: Vec::new(),
                output: render(self.lex, &output)?.text,
                words,
                seed: cand_seed,
                split: Split::Train,
            }))
        })
        .map(|records| assign_ids(records, &rule.letter().to_string()))
    }

    pub fn generate_nested(
        &self,
        seq: &[TransformId],
        n: usize,
        seed: u64,
    ) -> Result<Vec<DatasetRecord>, DatasetError> {
        let label = join_letters(seq);
        let [first, second] = seq else {
            return Err(DatasetError::InvalidSequence(label));
        };
        if self.compatibility().get(*first, *second) == 0.0 {
            return Err(DatasetError::IncompatiblePair(label));
        }
        if n as u128 > self.space_bound(*first) {
            return Err(DatasetError::GenerationExhausted { label, requested: n, produced: 0 });
        }
        let seq_seed = derive_seed(seed, &format!("nested/{label}"));
        self.collect(&label, n, |attempt| {
            let cand_seed = derive_seed(seq_seed, &attempt.to_string());
            let Some((clause, words)) = self.base_clause(*first, cand_seed) else {
                return Ok(None);
            };
            let result = compose(seq, &clause);
            if result.status != CompositionStatus::Ok {
                return Ok(None);
            }
            Ok(Some(DatasetRecord {
                id: String::new(),
                labels: seq.iter().map(|t| t.letter()).collect(),
                transform_names: seq.iter().map(|t| t.name().to_string()).collect(),
                input: render(self.lex, &clause)?.text,
                intermediates: result
                    .intermediates
                    .iter()
                    .map(|c| render(self.lex, c).map(|s| s.text))
                    .collect::<Result<_, _>>()?,
                output: render(self.lex, &result.final_clause)?.text,
                words,
                seed: cand_seed,
                split: Split::Train,
            }))
        })
        .map(|records| assign_ids(records, &label))
    }

    fn collect(
        &self,
        label: &str,
        n: usize,
        mut candidate: impl FnMut(u64) -> Result<Option<DatasetRecord>, DatasetError>,
    ) -> Result<Vec<DatasetRecord>, DatasetError> {
        let mut filter = self.new_filter();
        let mut out = Vec::with_capacity(n.min(4096));
        let mut stalled = 0usize;
        let mut attempt = 0u64;
        while out.len() < n {
            let accepted = match candidate(attempt)? {
                Some(rec) if filter.accept(&rec) => {
                    out.push(rec);
                    true
                }
                _ => false,
            };
            attempt += 1;
            stalled = if accepted { 0 } else { stalled + 1 };
            if stalled > STALL_LIMIT {
                return Err(DatasetError::GenerationExhausted {
                    label: label.to_string(),
                    requested: n,
                    produced: out.len(),
                });
            }
        }
        Ok(out)
    }

    /// Re-derives the base clause and composition of a stored record.
    pub fn regenerate(&self, rec: &DatasetRecord) -> Option<(Clause, Vec<Clause>, Clause)> {
        let rules = rec.rules()?;
        let (clause, _) = self.base_clause(*rules.first()?, rec.seed)?;
        let result = compose(&rules, &clause);
        (result.status == CompositionStatus::Ok)
            .then_some((clause, result.intermediates, result.final_clause))
    }

    /// Generates every single-rule and nested set of `spec`, in parallel
    /// per rule. Output is independent of the thread count.
    pub fn generate_corpus(&self, spec: &GenSpec) -> Result<Corpus, DatasetError> {
        let single = TransformId::ALL
            .par_iter()
            .map(|&rule| Ok((rule, self.generate_single(rule, spec.single_target(rule), spec.seed)?)))
            .collect::<Result<BTreeMap<_, _>, DatasetError>>()?;
        // Force the matrix before fanning out so workers share one copy.
        self.compatibility();
        let nested = spec
            .all_nested()
            .par_iter()
            .map(|seq| Ok((seq.clone(), self.generate_nested(&seq.0, spec.nested_count, spec.seed)?)))
            .collect::<Result<Vec<_>, DatasetError>>()?;
        Ok(Corpus { single, nested })
    }
}

fn assign_ids(mut records: Vec<DatasetRecord>, prefix: &str) -> Vec<DatasetRecord> {
    for (i, rec) in records.iter_mut().enumerate() {
        rec.id = format!("{prefix}-{i:05}");
    }
    records
}
