//! Deep-structure clauses and their surface realization.

mod render;
pub mod template;

use serde::{Deserialize, Serialize};

pub use crate::lexicon::{Number, Person, Tense};
pub use render::{render, render_words, RenderError, SurfaceSentence};
pub use template::{build_clause, Binding, Slot, Template, TemplateError, TemplateSet};

use crate::transforms::TransformId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NpKind {
    Common,
    Proper,
    Pronoun,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NounPhrase {
    pub determiner: Option<String>,
    pub premodifiers: Vec<String>,
    /// Lemma of the head noun; pronouns use their nominative form.
    pub head: String,
    pub number: Number,
    pub pp_modifiers: Vec<PrepPhrase>,
    pub kind: NpKind,
}

impl NounPhrase {
    pub fn common(determiner: &str, head: &str, number: Number) -> Self {
        NounPhrase {
            determiner: Some(determiner.to_string()),
            premodifiers: Vec::new(),
            head: head.to_string(),
            number,
            pp_modifiers: Vec::new(),
            kind: NpKind::Common,
        }
    }

    pub fn proper(name: &str) -> Self {
        NounPhrase {
            determiner: None,
            premodifiers: Vec::new(),
            head: name.to_string(),
            number: Number::Sg,
            pp_modifiers: Vec::new(),
            kind: NpKind::Proper,
        }
    }

    pub fn pronoun(nominative: &str) -> Self {
        let info = crate::lexicon::pronoun(nominative);
        NounPhrase {
            determiner: None,
            premodifiers: Vec::new(),
            head: nominative.to_string(),
            number: info.map_or(Number::Sg, |p| p.number),
            pp_modifiers: Vec::new(),
            kind: NpKind::Pronoun,
        }
    }

    pub fn person(&self) -> Person {
        match self.kind {
            NpKind::Pronoun => crate::lexicon::pronoun(&self.head).map_or(Person::Third, |p| p.person),
            _ => Person::Third,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrepPhrase {
    pub preposition: String,
    pub object: NounPhrase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Voice {
    Active,
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerbShape {
    Finite,
    ToInfinitive,
    BareInfinitive,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VerbGroup {
    pub modal: Option<String>,
    pub head_lemma: String,
    pub tense: Tense,
    pub voice: Voice,
    pub form: VerbShape,
}

impl VerbGroup {
    pub fn finite(head: &str, tense: Tense) -> Self {
        VerbGroup {
            modal: None,
            head_lemma: head.to_string(),
            tense,
            voice: Voice::Active,
            form: VerbShape::Finite,
        }
    }

    pub fn is_raising(&self) -> bool {
        crate::lexicon::is_raising_verb(&self.head_lemma)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Complement {
    Object(NounPhrase),
    PredicateAdj(String),
    SmallClause(NounPhrase, String),
    ThatClause(Box<Clause>),
    ToInfinitive(Box<Clause>),
    ExperiencerPP(PrepPhrase),
    ByPhrase(NounPhrase),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Adjunct {
    Prep(PrepPhrase),
    Adverb(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subject {
    Np(NounPhrase),
    ExpletiveIt,
    Empty,
}

impl Subject {
    pub fn as_np(&self) -> Option<&NounPhrase> {
        match self {
            Subject::Np(np) => Some(np),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClauseType {
    Declarative,
    Interrogative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentRole {
    Subject,
    Modal,
    Predicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layout {
    Normal,
    Segmented(Vec<SegmentRole>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub subject: Subject,
    pub verb: VerbGroup,
    pub complements: Vec<Complement>,
    pub adjuncts: Vec<Adjunct>,
    pub clause_type: ClauseType,
    pub layout: Layout,
    /// Generation-time membership tag: the rule this clause was built for.
    pub omega_tag: Option<TransformId>,
}

impl Clause {
    pub fn new(subject: Subject, verb: VerbGroup) -> Self {
        Clause {
            subject,
            verb,
            complements: Vec::new(),
            adjuncts: Vec::new(),
            clause_type: ClauseType::Declarative,
            layout: Layout::Normal,
            omega_tag: None,
        }
    }

    pub fn with_complement(mut self, c: Complement) -> Self {
        self.complements.push(c);
        self
    }

    pub fn with_adjunct(mut self, a: Adjunct) -> Self {
        self.adjuncts.push(a);
        self
    }

    pub fn object(&self) -> Option<&NounPhrase> {
        self.complements.iter().find_map(|c| match c {
            Complement::Object(np) => Some(np),
            _ => None,
        })
    }

    pub fn has_experiencer(&self) -> bool {
        self.complements.iter().any(|c| matches!(c, Complement::ExperiencerPP(_)))
    }

    pub fn that_clause(&self) -> Option<&Clause> {
        self.complements.iter().find_map(|c| match c {
            Complement::ThatClause(inner) => Some(inner.as_ref()),
            _ => None,
        })
    }

    pub fn to_infinitive(&self) -> Option<&Clause> {
        self.complements.iter().find_map(|c| match c {
            Complement::ToInfinitive(inner) => Some(inner.as_ref()),
            _ => None,
        })
    }
}

/// Structural equality ignoring `omega_tag` at every depth.
pub fn clause_equal(a: &Clause, b: &Clause) -> bool {
    untagged(a) == untagged(b)
}

fn untagged(c: &Clause) -> Clause {
    let mut c = c.clone();
    c.omega_tag = None;
    for comp in &mut c.complements {
        if let Complement::ThatClause(inner) | Complement::ToInfinitive(inner) = comp {
            **inner = untagged(inner);
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clause_equal_ignores_tags() {
        let c = Clause::new(
            Subject::Np(NounPhrase::common("the", "dog", Number::Sg)),
            VerbGroup::finite("sleep", Tense::Past),
        );
        let mut tagged = c.clone();
        tagged.omega_tag = Some(TransformId::IMovement);
        assert!(clause_equal(&c, &c));
        assert!(clause_equal(&c, &tagged));
        let mut other = c.clone();
        other.verb.tense = Tense::Present;
        assert!(!clause_equal(&c, &other));
    }
}
