//! Generator templates: a rule, typed slots, and a deep-structure skeleton.
//!
//! One template per line, tab-separated:
//!
//! ```text
//! id<TAB>rule<TAB>slots<TAB>skeleton
//! ```
//!
//! `slots` is a space-separated list of `name:Cat[|Cat...][+feature][-feature]`.
//! The skeleton is an s-expression:
//!
//! ```text
//! clause  := (S subject verb item*)
//! subject := np | it | _
//! np      := (np DET NUM HEAD npmod*)     DET: word or -, NUM: sg | pl | *
//! npmod   := (adj WORD) | (pp WORD np)
//! verb    := (v HEAD opt*)                opt: present past to bare passive modal:WORD
//! item    := (obj np) | (pred WORD) | (small np WORD) | (that clause) | (to clause)
//!          | (exp WORD np) | (by np) | (at WORD np) | (adv WORD)
//!          | question | (seg ROLE+)        ROLE: subject | modal | predicate
//! ```
//!
//! `WORD` and `HEAD` are literals or `$slot` references. A `*` number is
//! taken from the binding. Proper nouns and pronouns drop the determiner;
//! pronouns, mass nouns and plural-only nouns fix their own number.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use super::{
    Adjunct, Clause, ClauseType, Complement, Layout, NounPhrase, NpKind, PrepPhrase, SegmentRole,
    Subject, VerbGroup, VerbShape, Voice,
};
use crate::lexicon::{self, Category, Feature, Lexicon, Number, Tense, WordFilter};
use crate::transforms::TransformId;

const SHIPPED: &str = include_str!("../../data/templates.tsv");

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("slot `{slot}` bound to `{lemma}`, which is not a {expected}")]
    SlotMismatch {
        slot: String,
        lemma: String,
        expected: String,
    },
    #[error("slot `{0}` is not bound")]
    UnboundSlot(String),
    #[error("template `{template}`: {message}")]
    Skeleton { template: String, message: String },
    #[error("reading templates: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub filter: WordFilter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

impl Sexpr {
    fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(a) => Some(a),
            Sexpr::List(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub rule: TransformId,
    pub slots: Vec<Slot>,
    skeleton: Sexpr,
}

/// A lexeme bound to a slot, with an optional number for `*` noun phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub lemma: String,
    pub number: Option<Number>,
}

impl Binding {
    pub fn word(lemma: &str) -> Self {
        Binding { lemma: lemma.to_string(), number: None }
    }

    pub fn sg(lemma: &str) -> Self {
        Binding { lemma: lemma.to_string(), number: Some(Number::Sg) }
    }

    pub fn pl(lemma: &str) -> Self {
        Binding { lemma: lemma.to_string(), number: Some(Number::Pl) }
    }
}

impl Template {
    pub fn slot(&self, name: &str) -> Option<&Slot> {
        self.slots.iter().find(|s| s.name == name)
    }

    /// Names of slots that head a `*`-numbered noun phrase.
    pub fn free_number_slots(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_free_numbers(&self.skeleton, &mut out);
        out
    }

    /// Upper bound on distinct base clauses this template can produce.
    pub fn space_size(&self, lex: &Lexicon) -> u128 {
        let free = self.free_number_slots();
        self.slots.iter().fold(1u128, |acc, slot| {
            let n = lex.entries().iter().filter(|l| slot.filter.matches(l)).count() as u128;
            let factor = if free.contains(&slot.name) { 2 } else { 1 };
            acc.saturating_mul(n * factor)
        })
    }
}

fn collect_free_numbers(node: &Sexpr, out: &mut Vec<String>) {
    if let Sexpr::List(items) = node {
        if let [Sexpr::Atom(tag), _, Sexpr::Atom(num), Sexpr::Atom(head), ..] = items.as_slice() {
            if tag == "np" && num == "*" {
                if let Some(slot) = head.strip_prefix('$') {
                    out.push(slot.to_string());
                }
            }
        }
        items.iter().for_each(|c| collect_free_numbers(c, out));
    }
}

#[derive(Debug, Clone, Default)]
pub struct TemplateSet {
    templates: Vec<Template>,
}

impl TemplateSet {
    pub fn shipped() -> Self {
        Self::parse(SHIPPED).expect("shipped templates parse")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TemplateError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let mut templates: Vec<Template> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let err = |message: String| TemplateError::Parse { line, message };
            let cols: Vec<&str> = raw.split('\t').collect();
            let [id, rule, slots, skeleton] = cols.as_slice() else {
                return Err(err(format!("expected 4 tab-separated columns, got {}", cols.len())));
            };
            let id = id.trim().to_string();
            if templates.iter().any(|t| t.id == id) {
                return Err(err(format!("duplicate template id `{id}`")));
            }
            let rule: TransformId = rule.trim().parse().map_err(err)?;
            let slots = slots
                .split_whitespace()
                .map(parse_slot)
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            let skeleton = parse_sexpr(skeleton).map_err(err)?;
            check_slot_refs(&skeleton, &slots).map_err(err)?;
            templates.push(Template { id, rule, slots, skeleton });
        }
        Ok(TemplateSet { templates })
    }

    pub fn all(&self) -> &[Template] {
        &self.templates
    }

    pub fn get(&self, id: &str) -> Result<&Template, TemplateError> {
        self.templates
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| TemplateError::UnknownTemplate(id.to_string()))
    }

    pub fn for_rule(&self, rule: TransformId) -> Vec<&Template> {
        self.templates.iter().filter(|t| t.rule == rule).collect()
    }
}

fn parse_slot(spec: &str) -> Result<Slot, String> {
    let (name, rest) = spec
        .split_once(':')
        .ok_or_else(|| format!("slot `{spec}` needs a category"))?;
    let cut = rest.find(['+', '-']).unwrap_or(rest.len());
    let categories = rest[..cut]
        .split('|')
        .map(str::parse::<Category>)
        .collect::<Result<Vec<_>, _>>()?;
    let mut filter = WordFilter {
        categories,
        required: Default::default(),
        excluded: Default::default(),
    };
    let mut feats = &rest[cut..];
    while !feats.is_empty() {
        let sign = &feats[..1];
        let body = &feats[1..];
        let end = body.find(['+', '-']).unwrap_or(body.len());
        // feature names themselves contain '-' (plural-only)
        let (name_part, next) = if let Some(after) = body.strip_prefix("plural-only") {
            ("plural-only", after)
        } else {
            (&body[..end], &body[end..])
        };
        let feature: Feature = name_part.parse()?;
        filter = if sign == "+" { filter.require(feature) } else { filter.exclude(feature) };
        feats = next;
    }
    Ok(Slot { name: name.to_string(), filter })
}

fn parse_sexpr(text: &str) -> Result<Sexpr, String> {
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    let mut tokens = spaced.split_whitespace().peekable();
    let mut stack: Vec<Vec<Sexpr>> = vec![Vec::new()];
    for tok in tokens.by_ref() {
        match tok {
            "(" => stack.push(Vec::new()),
            ")" => {
                let list = stack.pop().ok_or("unbalanced `)`")?;
                stack.last_mut().ok_or("unbalanced `)`")?.push(Sexpr::List(list));
            }
            atom => stack.last_mut().ok_or("unbalanced `)`")?.push(Sexpr::Atom(atom.to_string())),
        }
    }
    match stack.as_mut_slice() {
        [top] if top.len() == 1 => Ok(top.remove(0)),
        [_] => Err("skeleton must be a single expression".into()),
        _ => Err("unbalanced `(`".into()),
    }
}

fn check_slot_refs(node: &Sexpr, slots: &[Slot]) -> Result<(), String> {
    match node {
        Sexpr::Atom(a) => {
            let name = a.strip_prefix('$').or_else(|| a.strip_prefix("modal:$"));
            match name {
                Some(n) if !slots.iter().any(|s| s.name == n) => Err(format!("undeclared slot `${n}`")),
                _ => Ok(()),
            }
        }
        Sexpr::List(items) => items.iter().try_for_each(|c| check_slot_refs(c, slots)),
    }
}

struct Builder<'a> {
    lex: &'a Lexicon,
    template: &'a Template,
    bindings: &'a HashMap<String, Binding>,
}

impl Builder<'_> {
    fn skeleton_err(&self, message: impl Into<String>) -> TemplateError {
        TemplateError::Skeleton { template: self.template.id.clone(), message: message.into() }
    }

    /// Resolves a literal or `$slot` word and checks the slot's category.
    fn word(&self, atom: &str) -> Result<(String, Option<&Binding>, Option<Category>), TemplateError> {
        let Some(name) = atom.strip_prefix('$') else {
            return Ok((atom.to_string(), None, None));
        };
        let slot = self
            .template
            .slot(name)
            .ok_or_else(|| self.skeleton_err(format!("undeclared slot `${name}`")))?;
        let binding = self
            .bindings
            .get(name)
            .ok_or_else(|| TemplateError::UnboundSlot(name.to_string()))?;
        let lexeme = slot
            .filter
            .categories
            .iter()
            .filter_map(|&c| self.lex.get(&binding.lemma, c))
            .find(|l| slot.filter.matches(l))
            .ok_or_else(|| TemplateError::SlotMismatch {
                slot: name.to_string(),
                lemma: binding.lemma.clone(),
                expected: slot.filter.to_string(),
            })?;
        Ok((binding.lemma.clone(), Some(binding), Some(lexeme.category)))
    }

    fn list<'s>(&self, node: &'s Sexpr, tag: &str) -> Result<&'s [Sexpr], TemplateError> {
        match node {
            Sexpr::List(items) if items.first().and_then(Sexpr::atom) == Some(tag) => Ok(&items[1..]),
            _ => Err(self.skeleton_err(format!("expected ({tag} ...)"))),
        }
    }

    fn atom<'s>(&self, node: &'s Sexpr) -> Result<&'s str, TemplateError> {
        node.atom().ok_or_else(|| self.skeleton_err("expected a word"))
    }

    fn clause(&self, node: &Sexpr) -> Result<Clause, TemplateError> {
        let items = self.list(node, "S")?;
        let [subject, verb, rest @ ..] = items else {
            return Err(self.skeleton_err("(S subject verb ...) needs a subject and a verb"));
        };
        let subject = match subject {
            Sexpr::Atom(a) if a == "it" => Subject::ExpletiveIt,
            Sexpr::Atom(a) if a == "_" => Subject::Empty,
            other => Subject::Np(self.np(other)?),
        };
        let mut clause = Clause::new(subject, self.verb(verb)?);
        for item in rest {
            self.item(item, &mut clause)?;
        }
        Ok(clause)
    }

    fn np(&self, node: &Sexpr) -> Result<NounPhrase, TemplateError> {
        let items = self.list(node, "np")?;
        let [det, num, head, mods @ ..] = items else {
            return Err(self.skeleton_err("(np DET NUM HEAD ...) is incomplete"));
        };
        let det = self.atom(det)?;
        let (head, binding, category) = self.word(self.atom(head)?)?;
        let mut np = match category {
            Some(Category::ProperNoun) => NounPhrase::proper(&head),
            Some(Category::Pronoun) => NounPhrase::pronoun(&head),
            _ => {
                let number = match self.atom(num)? {
                    "sg" => Number::Sg,
                    "pl" => Number::Pl,
                    "*" => binding.and_then(|b| b.number).unwrap_or(Number::Sg),
                    other => return Err(self.skeleton_err(format!("bad number `{other}`"))),
                };
                let lexeme = self.lex.get(&head, Category::Noun);
                let number = match lexeme.map(|l| l.features) {
                    Some(f) if f.has(Feature::PluralOnly) => Number::Pl,
                    Some(f) if f.has(Feature::Mass) => Number::Sg,
                    _ if det == "a" || det == "an" => Number::Sg,
                    _ => number,
                };
                let mut np = NounPhrase::common(det, &head, number);
                if det == "-" {
                    np.determiner = None;
                }
                np
            }
        };
        if np.kind == NpKind::Pronoun && lexicon::pronoun(&np.head).is_none() {
            return Err(TemplateError::SlotMismatch {
                slot: "pronoun".into(),
                lemma: np.head,
                expected: "personal pronoun".into(),
            });
        }
        for m in mods {
            match m {
                Sexpr::List(parts) => match parts.first().and_then(Sexpr::atom) {
                    Some("adj") if parts.len() == 2 => {
                        np.premodifiers.push(self.word(self.atom(&parts[1])?)?.0);
                    }
                    Some("pp") if parts.len() == 3 => {
                        np.pp_modifiers.push(self.pp(&parts[1], &parts[2])?);
                    }
                    _ => return Err(self.skeleton_err("noun modifiers are (adj W) or (pp P NP)")),
                },
                Sexpr::Atom(a) => return Err(self.skeleton_err(format!("unexpected `{a}` in np"))),
            }
        }
        Ok(np)
    }

    fn pp(&self, prep: &Sexpr, object: &Sexpr) -> Result<PrepPhrase, TemplateError> {
        Ok(PrepPhrase { preposition: self.word(self.atom(prep)?)?.0, object: self.np(object)? })
    }

    fn verb(&self, node: &Sexpr) -> Result<VerbGroup, TemplateError> {
        let items = self.list(node, "v")?;
        let [head, opts @ ..] = items else {
            return Err(self.skeleton_err("(v HEAD ...) needs a head"));
        };
        let (head, _, _) = self.word(self.atom(head)?)?;
        let mut vg = VerbGroup::finite(&head, Tense::Present);
        for opt in opts {
            match self.atom(opt)? {
                "present" => vg.tense = Tense::Present,
                "past" => vg.tense = Tense::Past,
                "to" => vg.form = VerbShape::ToInfinitive,
                "bare" => vg.form = VerbShape::BareInfinitive,
                "passive" => vg.voice = Voice::Passive,
                other => match other.strip_prefix("modal:") {
                    Some(m) => vg.modal = Some(self.word(m)?.0),
                    None => return Err(self.skeleton_err(format!("unknown verb option `{other}`"))),
                },
            }
        }
        Ok(vg)
    }

    fn item(&self, node: &Sexpr, clause: &mut Clause) -> Result<(), TemplateError> {
        let parts = match node {
            Sexpr::Atom(a) if a == "question" => {
                clause.clause_type = ClauseType::Interrogative;
                return Ok(());
            }
            Sexpr::Atom(a) => return Err(self.skeleton_err(format!("unexpected `{a}` in clause"))),
            Sexpr::List(parts) => parts,
        };
        let tag = parts.first().and_then(Sexpr::atom).unwrap_or_default();
        let args = &parts[1..];
        match (tag, args) {
            ("obj", [np]) => clause.complements.push(Complement::Object(self.np(np)?)),
            ("pred", [w]) => clause
                .complements
                .push(Complement::PredicateAdj(self.word(self.atom(w)?)?.0)),
            ("small", [np, w]) => clause.complements.push(Complement::SmallClause(
                self.np(np)?,
                self.word(self.atom(w)?)?.0,
            )),
            ("that", [c]) => clause.complements.push(Complement::ThatClause(Box::new(self.clause(c)?))),
            ("to", [c]) => clause.complements.push(Complement::ToInfinitive(Box::new(self.clause(c)?))),
            ("exp", [p, np]) => clause.complements.push(Complement::ExperiencerPP(self.pp(p, np)?)),
            ("by", [np]) => clause.complements.push(Complement::ByPhrase(self.np(np)?)),
            ("at", [p, np]) => clause.adjuncts.push(Adjunct::Prep(self.pp(p, np)?)),
            ("adv", [w]) => clause.adjuncts.push(Adjunct::Adverb(self.word(self.atom(w)?)?.0)),
            ("seg", roles) if !roles.is_empty() => {
                let roles = roles
                    .iter()
                    .map(|r| match self.atom(r)? {
                        "subject" => Ok(SegmentRole::Subject),
                        "modal" => Ok(SegmentRole::Modal),
                        "predicate" => Ok(SegmentRole::Predicate),
                        other => Err(self.skeleton_err(format!("unknown segment role `{other}`"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                clause.layout = Layout::Segmented(roles);
            }
            _ => return Err(self.skeleton_err(format!("malformed clause item `({tag} ...)`"))),
        }
        Ok(())
    }
}

/// Instantiates a template with bound lexemes. The result carries the
/// template's rule as its `omega_tag`.
pub fn build_clause(
    lex: &Lexicon,
    template: &Template,
    bindings: &HashMap<String, Binding>,
) -> Result<Clause, TemplateError> {
    for slot in &template.slots {
        if !bindings.contains_key(&slot.name) {
            return Err(TemplateError::UnboundSlot(slot.name.clone()));
        }
    }
    let builder = Builder { lex, template, bindings };
    let mut clause = builder.clause(&template.skeleton)?;
    clause.omega_tag = Some(template.rule);
    Ok(clause)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::render;

    fn bind(pairs: &[(&str, Binding)]) -> HashMap<String, Binding> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn passive_template_builds_reference_sentence() {
        let lex = Lexicon::shipped();
        let set = TemplateSet::shipped();
        let t = set.get("p1.past").unwrap();
        let c = build_clause(
            &lex,
            t,
            &bind(&[
                ("subj", Binding::sg("teacher")),
                ("verb", Binding::word("grade")),
                ("obj", Binding::pl("exam")),
            ]),
        )
        .unwrap();
        assert_eq!(c.omega_tag, Some(TransformId::NpPassive1));
        assert_eq!(render(&lex, &c).unwrap().text, "The teacher graded the exams.");
    }

    #[test]
    fn raising_template_builds_reference_sentence() {
        let lex = Lexicon::shipped();
        let set = TemplateSet::shipped();
        let t = set.get("r1.cop.proper").unwrap();
        let c = build_clause(
            &lex,
            t,
            &bind(&[
                ("who", Binding::word("John")),
                ("rv", Binding::word("seem")),
                ("adj", Binding::word("happy")),
            ]),
        )
        .unwrap();
        assert_eq!(render(&lex, &c).unwrap().text, "It seems that John is happy.");
    }

    #[test]
    fn verb_slot_bound_to_noun_is_a_mismatch() {
        let lex = Lexicon::shipped();
        let set = TemplateSet::shipped();
        let t = set.get("p1.past").unwrap();
        let err = build_clause(
            &lex,
            t,
            &bind(&[
                ("subj", Binding::sg("teacher")),
                ("verb", Binding::word("table")),
                ("obj", Binding::pl("exam")),
            ]),
        )
        .unwrap_err();
        assert!(matches!(err, TemplateError::SlotMismatch { ref slot, .. } if slot == "verb"), "{err}");
    }

    #[test]
    fn missing_binding_is_reported() {
        let lex = Lexicon::shipped();
        let set = TemplateSet::shipped();
        let t = set.get("p1.past").unwrap();
        let err = build_clause(&lex, t, &bind(&[("subj", Binding::sg("teacher"))])).unwrap_err();
        assert!(matches!(err, TemplateError::UnboundSlot(_)));
    }

    #[test]
    fn slot_specs_parse() {
        let s = parse_slot("obj:Noun-animate-mass-plural-only").unwrap();
        assert_eq!(s.filter.categories, vec![Category::Noun]);
        assert!(s.filter.excluded.has(Feature::PluralOnly));
        assert!(s.filter.excluded.has(Feature::Mass));
        let s = parse_slot("who:ProperNoun|Pronoun+animate").unwrap();
        assert_eq!(s.filter.categories, vec![Category::ProperNoun, Category::Pronoun]);
        assert!(s.filter.required.has(Feature::Animate));
        assert!(parse_slot("x:Thing").is_err());
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(matches!(
            TemplateSet::parse("a\tnp_passive_1\tx:Noun\t(S (np the sg $x) (v go)").unwrap_err(),
            TemplateError::Parse { line: 1, .. }
        ));
        assert!(matches!(
            TemplateSet::parse("a\tnp_passive_1\tx:Noun\t(S (np the sg $y) (v go))").unwrap_err(),
            TemplateError::Parse { line: 1, .. }
        ));
        assert!(matches!(
            TemplateSet::parse("a\tnot_a_rule\tx:Noun\t(S (np the sg $x) (v go))").unwrap_err(),
            TemplateError::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn every_rule_has_templates() {
        let set = TemplateSet::shipped();
        for rule in TransformId::ALL {
            assert!(!set.for_rule(rule).is_empty(), "{rule}");
        }
    }
}
