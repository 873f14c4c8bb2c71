//! Word store and English morphology.
//!
//! The shipped lexicon is a tab-separated file compiled into the binary;
//! `Lexicon::load` reads an alternative file in the same format:
//!
//! ```text
//! lemma<TAB>category<TAB>flags<TAB>forms
//! ```
//!
//! `flags` is a comma list (`-` for none). `forms` is optional: five
//! comma-separated verb forms (base, past, past participle, third singular,
//! progressive) for verbs, or the plural for nouns. Lines starting with `#`
//! are comments.

mod morphology;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use morphology::indefinite_article;

use crate::rng;

const SHIPPED: &str = include_str!("../../data/lexicon.tsv");

/// The raising verbs accepted by the raising transformations.
pub const RAISING_VERBS: &[&str] = &["seem", "appear", "happen", "prove", "turn out"];

/// Function words the renderer may emit without a bound lexeme.
pub const CLOSED_CLASS: &[&str] = &[
    "the", "a", "an", "my", "your", "his", "her", "our", "their", "to", "that", "it", "by", "am",
    "is", "are", "was", "were", "be", "been", "being", "do", "does", "did", "can", "will", "may",
    "must", "should", "i", "me", "you", "he", "him", "she", "we", "us", "they", "them",
];

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("unknown lemma `{0}`")]
    UnknownLemma(String),
    #[error("lexicon has {available} entries matching {filter}, {requested} requested")]
    InsufficientLexicon {
        filter: String,
        available: usize,
        requested: usize,
    },
    #[error("lexicon line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Noun,
    ProperNoun,
    Pronoun,
    Verb,
    Aux,
    Modal,
    Det,
    Adj,
    Prep,
    Adv,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::Noun,
        Category::ProperNoun,
        Category::Pronoun,
        Category::Verb,
        Category::Aux,
        Category::Modal,
        Category::Det,
        Category::Adj,
        Category::Prep,
        Category::Adv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Noun => "Noun",
            Category::ProperNoun => "ProperNoun",
            Category::Pronoun => "Pronoun",
            Category::Verb => "Verb",
            Category::Aux => "Aux",
            Category::Modal => "Modal",
            Category::Det => "Det",
            Category::Adj => "Adj",
            Category::Prep => "Prep",
            Category::Adv => "Adv",
        }
    }

    fn has_paradigm(self) -> bool {
        matches!(self, Category::Verb | Category::Aux | Category::Modal)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    PluralOnly,
    Mass,
    Animate,
    Transitive,
    Intransitive,
    Raising,
    Ecm,
}

impl Feature {
    const ALL: [Feature; 7] = [
        Feature::PluralOnly,
        Feature::Mass,
        Feature::Animate,
        Feature::Transitive,
        Feature::Intransitive,
        Feature::Raising,
        Feature::Ecm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::PluralOnly => "plural-only",
            Feature::Mass => "mass",
            Feature::Animate => "animate",
            Feature::Transitive => "transitive",
            Feature::Intransitive => "intransitive",
            Feature::Raising => "raising",
            Feature::Ecm => "ecm",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown feature `{s}`"))
    }
}

/// Set of [`Feature`]s.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Features(u8);

impl Features {
    pub const NONE: Features = Features(0);

    pub fn with(self, f: Feature) -> Self {
        Features(self.0 | f.bit())
    }

    pub fn has(self, f: Feature) -> bool {
        self.0 & f.bit() != 0
    }

    pub fn contains_all(self, other: Features) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn intersects(self, other: Features) -> bool {
        self.0 & other.0 != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Feature> {
        Feature::ALL.into_iter().filter(move |f| self.has(*f))
    }
}

impl FromIterator<Feature> for Features {
    fn from_iter<I: IntoIterator<Item = Feature>>(iter: I) -> Self {
        iter.into_iter().fold(Features::NONE, Features::with)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lexeme {
    pub lemma: String,
    pub category: Category,
    pub features: Features,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerbForm {
    Base,
    Past,
    PastParticiple,
    ThirdSg,
    Progressive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Number {
    Sg,
    Pl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Person {
    First,
    Second,
    Third,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tense {
    Present,
    Past,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbParadigm {
    pub base: String,
    pub past: String,
    pub past_participle: String,
    pub third_sg: String,
    pub progressive: String,
    pub is_raising_verb: bool,
    pub is_transitive: bool,
}

impl VerbParadigm {
    fn form(&self, form: VerbForm) -> &str {
        match form {
            VerbForm::Base => &self.base,
            VerbForm::Past => &self.past,
            VerbForm::PastParticiple => &self.past_participle,
            VerbForm::ThirdSg => &self.third_sg,
            VerbForm::Progressive => &self.progressive,
        }
    }
}

/// Case and agreement features of a personal pronoun.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PronounInfo {
    pub nominative: &'static str,
    pub accusative: &'static str,
    pub person: Person,
    pub number: Number,
}

const PRONOUNS: &[PronounInfo] = &[
    PronounInfo { nominative: "I", accusative: "me", person: Person::First, number: Number::Sg },
    PronounInfo { nominative: "you", accusative: "you", person: Person::Second, number: Number::Sg },
    PronounInfo { nominative: "he", accusative: "him", person: Person::Third, number: Number::Sg },
    PronounInfo { nominative: "she", accusative: "her", person: Person::Third, number: Number::Sg },
    PronounInfo { nominative: "we", accusative: "us", person: Person::First, number: Number::Pl },
    PronounInfo { nominative: "they", accusative: "them", person: Person::Third, number: Number::Pl },
];

pub fn pronoun(lemma: &str) -> Option<&'static PronounInfo> {
    PRONOUNS.iter().find(|p| p.nominative == lemma)
}

pub fn is_raising_verb(lemma: &str) -> bool {
    RAISING_VERBS.contains(&lemma)
}

/// The tense-carrying auxiliary inserted when a plain verb is questioned.
/// The caller must demote the main verb to its base form.
pub fn do_support(tense: Tense, number: Number, person: Person) -> &'static str {
    match (tense, number, person) {
        (Tense::Past, _, _) => "did",
        (Tense::Present, Number::Sg, Person::Third) => "does",
        (Tense::Present, _, _) => "do",
    }
}

const MODAL_PAST: &[(&str, &str)] = &[("can", "could"), ("will", "would"), ("may", "might")];

/// Which entries `sample_words` may draw from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordFilter {
    pub categories: Vec<Category>,
    pub required: Features,
    pub excluded: Features,
}

impl WordFilter {
    pub fn category(category: Category) -> Self {
        WordFilter {
            categories: vec![category],
            required: Features::NONE,
            excluded: Features::NONE,
        }
    }

    pub fn require(mut self, f: Feature) -> Self {
        self.required = self.required.with(f);
        self
    }

    pub fn exclude(mut self, f: Feature) -> Self {
        self.excluded = self.excluded.with(f);
        self
    }

    pub fn matches(&self, lexeme: &Lexeme) -> bool {
        self.categories.contains(&lexeme.category)
            && lexeme.features.contains_all(self.required)
            && !lexeme.features.intersects(self.excluded)
    }
}

impl fmt::Display for WordFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cats: Vec<_> = self.categories.iter().map(|c| c.name()).collect();
        write!(f, "{}", cats.join("|"))?;
        for feat in self.required.iter() {
            write!(f, "+{}", feat.name())?;
        }
        for feat in self.excluded.iter() {
            write!(f, "-{}", feat.name())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<Lexeme>,
    index: HashMap<(String, Category), usize>,
    paradigms: HashMap<String, VerbParadigm>,
    plurals: HashMap<String, String>,
}

impl Lexicon {
    /// The lexicon compiled into the crate.
    pub fn shipped() -> Self {
        Self::parse(SHIPPED).expect("shipped lexicon parses")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Lexicon {
            entries: Vec::new(),
            index: HashMap::new(),
            paradigms: HashMap::new(),
            plurals: HashMap::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| LexiconError::Parse { line: line_no, message };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 || cols.len() > 4 {
                return Err(err(format!("expected 2-4 tab-separated columns, got {}", cols.len())));
            }
            let lemma = cols[0].trim();
            let category: Category = cols[1].trim().parse().map_err(err)?;
            if lemma.is_empty() {
                return Err(err("empty lemma".into()));
            }
            let lowercase_required = !matches!(category, Category::ProperNoun) && lemma != "I";
            if lowercase_required && lemma != lemma.to_lowercase() {
                return Err(err(format!("lemma `{lemma}` must be lowercase")));
            }
            let mut features = Features::NONE;
            if let Some(flags) = cols.get(2).map(|s| s.trim()).filter(|s| !s.is_empty() && *s != "-") {
                for flag in flags.split(',') {
                    features = features.with(flag.trim().parse().map_err(err)?);
                }
            }
            let forms: Vec<&str> = cols
                .get(3)
                .map(|s| s.split(',').map(str::trim).filter(|s| !s.is_empty()).collect())
                .unwrap_or_default();

            let key = (lemma.to_string(), category);
            if lex.index.contains_key(&key) {
                return Err(err(format!("duplicate entry `{lemma}` ({category})")));
            }
            match category {
                c if c.has_paradigm() => {
                    let paradigm = match forms.as_slice() {
                        [] => default_paradigm(lemma, category),
                        [b, p, pp, s, g] => [b, p, pp, s, g].map(|f| f.to_string()),
                        _ => return Err(err("verb forms column needs exactly five forms".into())),
                    };
                    let [base, past, past_participle, third_sg, progressive] = paradigm;
                    lex.paradigms.insert(
                        lemma.to_string(),
                        VerbParadigm {
                            base,
                            past,
                            past_participle,
                            third_sg,
                            progressive,
                            is_raising_verb: features.has(Feature::Raising),
                            is_transitive: features.has(Feature::Transitive),
                        },
                    );
                }
                Category::Noun => match forms.as_slice() {
                    [] => {}
                    [plural] => {
                        lex.plurals.insert(lemma.to_string(), plural.to_string());
                    }
                    _ => return Err(err("noun forms column holds a single plural".into())),
                },
                _ if !forms.is_empty() => {
                    return Err(err(format!("{category} entries take no forms column")));
                }
                _ => {}
            }
            if features.has(Feature::Raising) && !is_raising_verb(lemma) {
                return Err(err(format!("`{lemma}` is not one of the raising verbs")));
            }
            lex.index.insert(key, lex.entries.len());
            lex.entries.push(Lexeme { lemma: lemma.to_string(), category, features });
        }
        Ok(lex)
    }

    pub fn entries(&self) -> &[Lexeme] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, lemma: &str, category: Category) -> Option<&Lexeme> {
        self.index.get(&(lemma.to_string(), category)).map(|&i| &self.entries[i])
    }

    pub fn paradigm(&self, lemma: &str) -> Result<&VerbParadigm, LexiconError> {
        self.paradigms
            .get(lemma)
            .ok_or_else(|| LexiconError::UnknownLemma(lemma.to_string()))
    }

    pub fn inflect(&self, lemma: &str, form: VerbForm) -> Result<String, LexiconError> {
        Ok(self.paradigm(lemma)?.form(form).to_string())
    }

    /// Finite form of `lemma` agreeing with its subject.
    pub fn agree(
        &self,
        lemma: &str,
        number: Number,
        person: Person,
        tense: Tense,
    ) -> Result<String, LexiconError> {
        let paradigm = self.paradigm(lemma)?;
        if lemma == "be" {
            let singular_like = number == Number::Sg && person != Person::Second;
            let form = match (tense, singular_like, person) {
                (Tense::Present, true, Person::First) => "am",
                (Tense::Present, true, _) => "is",
                (Tense::Present, false, _) => "are",
                (Tense::Past, true, _) => "was",
                (Tense::Past, false, _) => "were",
            };
            return Ok(form.to_string());
        }
        let form = match (tense, number, person) {
            (Tense::Past, _, _) => VerbForm::Past,
            (Tense::Present, Number::Sg, Person::Third) => VerbForm::ThirdSg,
            (Tense::Present, _, _) => VerbForm::Base,
        };
        Ok(paradigm.form(form).to_string())
    }

    /// Plural of a common noun; `UnknownLemma` if the noun is not listed.
    pub fn plural(&self, noun: &str) -> Result<String, LexiconError> {
        if self.get(noun, Category::Noun).is_none() {
            return Err(LexiconError::UnknownLemma(noun.to_string()));
        }
        Ok(self
            .plurals
            .get(noun)
            .cloned()
            .unwrap_or_else(|| morphology::plural(noun)))
    }

    /// Draws `count` distinct entries matching `filter`, deterministic under `seed`.
    pub fn sample_words(
        &self,
        filter: &WordFilter,
        count: usize,
        seed: u64,
    ) -> Result<Vec<&Lexeme>, LexiconError> {
        let candidates: Vec<&Lexeme> = self.entries.iter().filter(|l| filter.matches(l)).collect();
        if count == 0 || candidates.len() < count {
            return Err(LexiconError::InsufficientLexicon {
                filter: filter.to_string(),
                available: candidates.len(),
                requested: count,
            });
        }
        let mut rng = rng::seeded(seed);
        Ok(index::sample(&mut rng, candidates.len(), count)
            .into_iter()
            .map(|i| candidates[i])
            .collect())
    }

    /// Every lowercase surface token the renderer can produce from this lexicon.
    pub fn vocabulary(&self) -> HashSet<String> {
        let mut vocab: HashSet<String> = CLOSED_CLASS.iter().map(|s| s.to_string()).collect();
        let mut add = |s: &str| {
            for tok in s.split_whitespace() {
                vocab.insert(tok.to_lowercase());
            }
        };
        for entry in &self.entries {
            add(&entry.lemma);
            if entry.category == Category::Noun {
                if let Ok(p) = self.plural(&entry.lemma) {
                    add(&p);
                }
            }
            if let Some(p) = pronoun(&entry.lemma) {
                add(p.accusative);
            }
        }
        for p in self.paradigms.values() {
            for form in [&p.base, &p.past, &p.past_participle, &p.third_sg, &p.progressive] {
                add(form);
            }
        }
        vocab
    }
}

/// Inflects the first word of a (possibly multiword) lemma and keeps the particle.
fn default_paradigm(lemma: &str, category: Category) -> [String; 5] {
    if category == Category::Modal {
        let past = MODAL_PAST
            .iter()
            .find(|(m, _)| *m == lemma)
            .map_or(lemma, |(_, p)| p);
        return [lemma, past, lemma, lemma, lemma].map(str::to_string);
    }
    let (head, particle) = match lemma.split_once(' ') {
        Some((h, rest)) => (h, Some(rest)),
        None => (lemma, None),
    };
    morphology::verb_forms(head).map(|form| match particle {
        Some(p) => format!("{form} {p}"),
        None => form,
    })
}
