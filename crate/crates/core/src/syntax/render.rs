use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    Adjunct, Clause, ClauseType, Complement, Layout, NounPhrase, NpKind, PrepPhrase, SegmentRole,
    Subject, VerbGroup, VerbShape, Voice,
};
use crate::lexicon::{
    self, do_support, indefinite_article, Lexicon, LexiconError, Number, Person, VerbForm,
};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("invalid clause: {0}")]
    Invariant(String),
}

/// A realized sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceSentence {
    pub text: String,
}

impl fmt::Display for SurfaceSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Case {
    Nominative,
    Accusative,
}

/// Realizes a clause as text.
///
/// Normal layout yields one capitalized sentence ending in `.` or `?`.
/// Segmented layout joins its segments with `"; "` and carries no terminal
/// punctuation.
pub fn render(lex: &Lexicon, clause: &Clause) -> Result<SurfaceSentence, RenderError> {
    validate(clause, true)?;
    let text = match &clause.layout {
        Layout::Normal => {
            let words = clause_words(lex, clause)?;
            let end = match clause.clause_type {
                ClauseType::Declarative => '.',
                ClauseType::Interrogative => '?',
            };
            format!("{}{end}", words.join(" "))
        }
        Layout::Segmented(roles) => segments(lex, clause, roles)?.join("; "),
    };
    if text.trim().is_empty() {
        return Err(RenderError::Invariant("empty rendering".into()));
    }
    Ok(SurfaceSentence { text: capitalize(&text) })
}

/// The tokens of a Normal-layout clause without punctuation.
pub fn render_words(lex: &Lexicon, clause: &Clause) -> Result<Vec<String>, RenderError> {
    validate(clause, true)?;
    clause_words(lex, clause)
}

fn invariant(msg: impl Into<String>) -> RenderError {
    RenderError::Invariant(msg.into())
}

fn validate(c: &Clause, top_level: bool) -> Result<(), RenderError> {
    let objects = c.complements.iter().filter(|x| matches!(x, Complement::Object(_))).count();
    if objects > 1 {
        return Err(invariant("more than one object"));
    }
    let by_phrase = c.complements.iter().any(|x| matches!(x, Complement::ByPhrase(_)));
    if by_phrase && c.verb.voice != Voice::Passive {
        return Err(invariant("by-phrase on an active clause"));
    }
    match &c.subject {
        Subject::ExpletiveIt => {
            if c.that_clause().is_none() || !c.verb.is_raising() {
                return Err(invariant("expletive subject needs a raising verb and a that-clause"));
            }
        }
        Subject::Empty if c.verb.form == VerbShape::Finite => {
            return Err(invariant("finite clause without a subject"));
        }
        Subject::Np(np) => validate_np(np)?,
        Subject::Empty => {}
    }
    if c.clause_type == ClauseType::Interrogative
        && (c.verb.form != VerbShape::Finite || c.layout != Layout::Normal)
    {
        return Err(invariant("questions must be finite, unsegmented clauses"));
    }
    if let Layout::Segmented(roles) = &c.layout {
        if !top_level {
            return Err(invariant("segmented layout inside an embedded clause"));
        }
        if roles.contains(&SegmentRole::Modal) && c.verb.modal.is_none() {
            return Err(invariant("modal segment without a modal"));
        }
        if roles.is_empty() {
            return Err(invariant("segmented layout without segments"));
        }
    }
    if c.verb.modal.is_some() && c.verb.form != VerbShape::Finite {
        return Err(invariant("modal on a non-finite verb"));
    }
    for comp in &c.complements {
        match comp {
            Complement::ThatClause(inner) => {
                if inner.verb.form != VerbShape::Finite || inner.clause_type != ClauseType::Declarative {
                    return Err(invariant("that-clause must be a finite declarative"));
                }
                validate(inner, false)?;
            }
            Complement::ToInfinitive(inner) => {
                if inner.verb.form != VerbShape::ToInfinitive {
                    return Err(invariant("to-infinitive complement with a non-infinitive verb"));
                }
                validate(inner, false)?;
            }
            Complement::Object(np) | Complement::SmallClause(np, _) | Complement::ByPhrase(np) => {
                validate_np(np)?
            }
            Complement::ExperiencerPP(pp) => validate_pp(pp)?,
            Complement::PredicateAdj(_) => {}
        }
    }
    for adj in &c.adjuncts {
        if let Adjunct::Prep(pp) = adj {
            validate_pp(pp)?;
        }
    }
    Ok(())
}

fn validate_np(np: &NounPhrase) -> Result<(), RenderError> {
    if np.kind != NpKind::Common && np.determiner.is_some() {
        return Err(invariant(format!("`{}` cannot take a determiner", np.head)));
    }
    np.pp_modifiers.iter().try_for_each(validate_pp)
}

fn validate_pp(pp: &PrepPhrase) -> Result<(), RenderError> {
    if pp.preposition.is_empty() {
        return Err(invariant("empty preposition"));
    }
    validate_np(&pp.object)
}

fn capitalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut done = false;
    for ch in text.chars() {
        if !done && ch.is_alphabetic() {
            out.extend(ch.to_uppercase());
            done = true;
        } else {
            out.push(ch);
        }
    }
    out
}

fn agreement(subject: &Subject) -> (Number, Person) {
    match subject {
        Subject::Np(np) => (np.number, np.person()),
        Subject::ExpletiveIt | Subject::Empty => (Number::Sg, Person::Third),
    }
}

fn np_words(lex: &Lexicon, np: &NounPhrase, case: Case) -> Result<Vec<String>, RenderError> {
    let mut words = Vec::new();
    match np.kind {
        NpKind::Pronoun => {
            let info = lexicon::pronoun(&np.head)
                .ok_or_else(|| LexiconError::UnknownLemma(np.head.clone()))?;
            words.push(match case {
                Case::Nominative => info.nominative,
                Case::Accusative => info.accusative,
            }
            .to_string());
        }
        NpKind::Proper => words.push(np.head.clone()),
        NpKind::Common => {
            let head = match np.number {
                Number::Sg => np.head.clone(),
                Number::Pl => lex.plural(&np.head)?,
            };
            if let Some(det) = &np.determiner {
                if det == "a" || det == "an" {
                    let next = np.premodifiers.first().unwrap_or(&head);
                    words.push(indefinite_article(next).to_string());
                } else {
                    words.push(det.clone());
                }
            }
            words.extend(np.premodifiers.iter().cloned());
            words.push(head);
        }
    }
    for pp in &np.pp_modifiers {
        words.extend(pp_words(lex, pp)?);
    }
    Ok(words)
}

fn pp_words(lex: &Lexicon, pp: &PrepPhrase) -> Result<Vec<String>, RenderError> {
    let mut words = vec![pp.preposition.clone()];
    words.extend(np_words(lex, &pp.object, Case::Accusative)?);
    Ok(words)
}

fn nonfinite(lex: &Lexicon, vg: &VerbGroup) -> Result<Vec<String>, RenderError> {
    Ok(match vg.voice {
        Voice::Passive => vec![
            "be".to_string(),
            lex.inflect(&vg.head_lemma, VerbForm::PastParticiple)?,
        ],
        Voice::Active => vec![lex.inflect(&vg.head_lemma, VerbForm::Base)?],
    })
}

/// Verb words in declarative order, plus whether the first word is an
/// auxiliary that inverts in questions.
fn verb_chain(
    lex: &Lexicon,
    vg: &VerbGroup,
    (number, person): (Number, Person),
) -> Result<(Vec<String>, bool), RenderError> {
    match vg.form {
        VerbShape::Finite => {
            if let Some(modal) = &vg.modal {
                let mut words = vec![modal.clone()];
                words.extend(nonfinite(lex, vg)?);
                Ok((words, true))
            } else if vg.voice == Voice::Passive {
                let be = lex.agree("be", number, person, vg.tense)?;
                let pp = lex.inflect(&vg.head_lemma, VerbForm::PastParticiple)?;
                Ok((vec![be, pp], true))
            } else {
                let finite = lex.agree(&vg.head_lemma, number, person, vg.tense)?;
                Ok((vec![finite], vg.head_lemma == "be"))
            }
        }
        VerbShape::ToInfinitive => {
            let mut words = vec!["to".to_string()];
            words.extend(nonfinite(lex, vg)?);
            Ok((words, false))
        }
        VerbShape::BareInfinitive => Ok((nonfinite(lex, vg)?, false)),
    }
}

fn subject_words(lex: &Lexicon, c: &Clause) -> Result<Vec<String>, RenderError> {
    let case = if c.verb.form == VerbShape::Finite {
        Case::Nominative
    } else {
        Case::Accusative
    };
    Ok(match &c.subject {
        Subject::Np(np) => np_words(lex, np, case)?,
        Subject::ExpletiveIt => vec!["it".to_string()],
        Subject::Empty => Vec::new(),
    })
}

/// Complements, then adjuncts, then any by-phrase.
fn tail_words(lex: &Lexicon, c: &Clause) -> Result<Vec<String>, RenderError> {
    let mut words = Vec::new();
    let mut by_phrases = Vec::new();
    for comp in &c.complements {
        match comp {
            Complement::Object(np) => words.extend(np_words(lex, np, Case::Accusative)?),
            Complement::PredicateAdj(adj) => words.push(adj.clone()),
            Complement::SmallClause(np, adj) => {
                words.extend(np_words(lex, np, Case::Accusative)?);
                words.push(adj.clone());
            }
            Complement::ThatClause(inner) => {
                words.push("that".to_string());
                words.extend(clause_words(lex, inner)?);
            }
            Complement::ToInfinitive(inner) => words.extend(clause_words(lex, inner)?),
            Complement::ExperiencerPP(pp) => words.extend(pp_words(lex, pp)?),
            Complement::ByPhrase(np) => by_phrases.push(np),
        }
    }
    for adj in &c.adjuncts {
        match adj {
            Adjunct::Prep(pp) => words.extend(pp_words(lex, pp)?),
            Adjunct::Adverb(adv) => words.push(adv.clone()),
        }
    }
    for np in by_phrases {
        words.push("by".to_string());
        words.extend(np_words(lex, np, Case::Accusative)?);
    }
    Ok(words)
}

fn clause_words(lex: &Lexicon, c: &Clause) -> Result<Vec<String>, RenderError> {
    let agr = agreement(&c.subject);
    let subject = subject_words(lex, c)?;
    let (chain, inverts) = verb_chain(lex, &c.verb, agr)?;
    let mut words = Vec::new();
    match c.clause_type {
        ClauseType::Declarative => {
            words.extend(subject);
            words.extend(chain);
        }
        ClauseType::Interrogative if inverts => {
            let mut chain = chain.into_iter();
            words.extend(chain.next());
            words.extend(subject);
            words.extend(chain);
        }
        ClauseType::Interrogative => {
            words.push(do_support(c.verb.tense, agr.0, agr.1).to_string());
            words.extend(subject);
            words.push(lex.inflect(&c.verb.head_lemma, VerbForm::Base)?);
        }
    }
    words.extend(tail_words(lex, c)?);
    Ok(words)
}

fn segments(lex: &Lexicon, c: &Clause, roles: &[SegmentRole]) -> Result<Vec<String>, RenderError> {
    let (mut chain, _) = verb_chain(lex, &c.verb, agreement(&c.subject))?;
    let modal_split = roles.contains(&SegmentRole::Modal);
    if modal_split {
        chain.remove(0);
    }
    let mut predicate = chain;
    predicate.extend(tail_words(lex, c)?);
    roles
        .iter()
        .map(|role| {
            Ok(match role {
                SegmentRole::Subject => subject_words(lex, c)?.join(" "),
                SegmentRole::Modal => c.verb.modal.clone().unwrap_or_default(),
                SegmentRole::Predicate => predicate.join(" "),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Tense;

    fn lex() -> Lexicon {
        Lexicon::shipped()
    }

    fn the(noun: &str, number: Number) -> NounPhrase {
        NounPhrase::common("the", noun, number)
    }

    #[test]
    fn declarative_transitive() {
        let c = Clause::new(
            Subject::Np(the("scientist", Number::Sg)),
            VerbGroup::finite("discover", Tense::Past),
        )
        .with_complement(Complement::Object(the("formula", Number::Sg)));
        assert_eq!(render(&lex(), &c).unwrap().text, "The scientist discovered the formula.");
    }

    #[test]
    fn modal_question() {
        let mut vg = VerbGroup::finite("swim", Tense::Present);
        vg.modal = Some("can".into());
        let mut c = Clause::new(Subject::Np(NounPhrase::pronoun("she")), vg);
        c.clause_type = ClauseType::Interrogative;
        assert_eq!(render(&lex(), &c).unwrap().text, "Can she swim?");
    }

    #[test]
    fn segmented_modal() {
        let mut vg = VerbGroup::finite("solve", Tense::Present);
        vg.modal = Some("can".into());
        let mut c = Clause::new(Subject::Np(the("student", Number::Pl)), vg)
            .with_complement(Complement::Object(the("problem", Number::Sg)));
        c.layout = Layout::Segmented(vec![
            SegmentRole::Subject,
            SegmentRole::Modal,
            SegmentRole::Predicate,
        ]);
        assert_eq!(render(&lex(), &c).unwrap().text, "The students; can; solve the problem");
    }

    #[test]
    fn do_support_question() {
        let mut c = Clause::new(
            Subject::Np(the("book", Number::Sg)),
            VerbGroup::finite("disappear", Tense::Past),
        );
        c.clause_type = ClauseType::Interrogative;
        assert_eq!(render(&lex(), &c).unwrap().text, "Did the book disappear?");
    }

    #[test]
    fn by_phrase_on_active_clause_is_rejected() {
        let c = Clause::new(
            Subject::Np(the("dog", Number::Sg)),
            VerbGroup::finite("chase", Tense::Past),
        )
        .with_complement(Complement::ByPhrase(the("cat", Number::Sg)));
        assert!(matches!(render(&lex(), &c), Err(RenderError::Invariant(_))));
    }

    #[test]
    fn indefinite_article_follows_next_word() {
        let mut np = NounPhrase::common("a", "apple", Number::Sg);
        let c = Clause::new(Subject::Np(NounPhrase::pronoun("I")), VerbGroup::finite("eat", Tense::Past))
            .with_complement(Complement::Object(np.clone()));
        assert_eq!(render(&lex(), &c).unwrap().text, "I ate an apple.");
        np.premodifiers.push("red".into());
        let c = Clause::new(Subject::Np(NounPhrase::pronoun("I")), VerbGroup::finite("eat", Tense::Past))
            .with_complement(Complement::Object(np));
        assert_eq!(render(&lex(), &c).unwrap().text, "I ate a red apple.");
    }

    #[test]
    fn capitalization_keeps_proper_nouns() {
        let c = Clause::new(Subject::Np(the("dog", Number::Sg)), VerbGroup::finite("follow", Tense::Past))
            .with_complement(Complement::Object(NounPhrase::proper("Mary")));
        assert_eq!(render(&lex(), &c).unwrap().text, "The dog followed Mary.");
    }
}
