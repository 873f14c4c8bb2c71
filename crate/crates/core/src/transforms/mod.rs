//! The ten transformation operators and their composition.
//!
//! Each operator has a structural precondition ([`applicable`]) and a rewrite
//! ([`apply_rule`]). A clause outside a rule's domain is, for that rule, in the
//! absorbing set: [`compose`] reports the step where this happens instead of
//! failing.

mod compat;
mod id;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compat::{build_compatibility_matrix, CompatError, CompatibilityMatrix};
pub use id::{join_letters, letter_map, parse_sequence, RuleCategory, RuleSpec, TransformId};

use crate::lexicon::Tense;
use crate::syntax::{
    Adjunct, Clause, ClauseType, Complement, Layout, SegmentRole, Subject, VerbShape, Voice,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("{0} is not applicable to this clause")]
    NotApplicable(TransformId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompositionStatus {
    Ok,
    /// Index into the rule list of the first rule that did not apply.
    Absorbed(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionResult {
    pub intermediates: Vec<Clause>,
    pub final_clause: Clause,
    pub status: CompositionStatus,
}

fn plain_declarative(c: &Clause) -> bool {
    c.clause_type == ClauseType::Declarative
        && c.layout == Layout::Normal
        && c.verb.form == VerbShape::Finite
}

fn is_active_transitive(c: &Clause) -> bool {
    c.verb.voice == Voice::Active && c.object().is_some()
}

/// `[NP][raising verb][to VP]` with an empty embedded subject.
fn raised_complement(c: &Clause) -> Option<&Clause> {
    c.to_infinitive().filter(|inner| inner.subject == Subject::Empty)
}

fn passive_applicable(c: &Clause) -> bool {
    if !plain_declarative(c) || c.subject.as_np().is_none() {
        return false;
    }
    if c.verb.is_raising() {
        raised_complement(c).is_some_and(is_active_transitive)
    } else {
        is_active_transitive(c)
    }
}

fn raising1_applicable(c: &Clause) -> bool {
    plain_declarative(c)
        && c.subject == Subject::ExpletiveIt
        && c.verb.is_raising()
        && !c.has_experiencer()
        && c.that_clause().is_some_and(|inner| {
            let embedded_ok = match inner.verb.modal.as_deref() {
                None => inner.verb.tense == c.verb.tense,
                Some("will") => c.verb.tense == Tense::Present,
                Some(_) => false,
            };
            inner.subject.as_np().is_some() && embedded_ok
        })
}

fn raising2_applicable(c: &Clause) -> bool {
    plain_declarative(c)
        && c.subject.as_np().is_some()
        && c.verb.is_raising()
        && !c.has_experiencer()
        && raised_complement(c).is_some()
}

/// Raised subject with an experiencer: `John seems to me to be honest`.
fn raising3_lowers(c: &Clause) -> bool {
    plain_declarative(c)
        && c.subject.as_np().is_some()
        && c.verb.is_raising()
        && c.has_experiencer()
        && raised_complement(c).is_some()
}

/// Expletive clause over a past eventive embedding under a present matrix:
/// `It seems that the chef placed ...`.
fn raising3_raises(c: &Clause) -> bool {
    plain_declarative(c)
        && c.subject == Subject::ExpletiveIt
        && c.verb.is_raising()
        && !c.has_experiencer()
        && c.verb.tense == Tense::Present
        && c.that_clause().is_some_and(|inner| {
            inner.subject.as_np().is_some()
                && inner.verb.modal.is_none()
                && inner.verb.tense == Tense::Past
                && inner.verb.head_lemma != "be"
        })
}

fn segmented_with(c: &Clause, pred: impl Fn(&Clause) -> bool) -> bool {
    c.clause_type == ClauseType::Declarative
        && matches!(c.layout, Layout::Segmented(_))
        && c.subject.as_np().is_some()
        && pred(c)
}

/// Structural precondition of each rule. Ignores `omega_tag`.
pub fn applicable(id: TransformId, c: &Clause) -> bool {
    match id {
        TransformId::Extraposition => {
            plain_declarative(c) && c.subject.as_np().is_some_and(|np| !np.pp_modifiers.is_empty())
        }
        TransformId::IMovement => plain_declarative(c) && c.subject != Subject::Empty,
        TransformId::NpPassive1 | TransformId::NpPassive3 => passive_applicable(c),
        TransformId::NpPassive2 => {
            plain_declarative(c)
                && c.verb.voice == Voice::Active
                && c.complements.iter().any(|x| matches!(x, Complement::SmallClause(..)))
        }
        TransformId::NpRaising1 => raising1_applicable(c),
        TransformId::NpRaising2 => raising2_applicable(c),
        TransformId::NpRaising3 => raising3_lowers(c) || raising3_raises(c),
        TransformId::VMovement1 => segmented_with(c, |c| c.verb.form == VerbShape::ToInfinitive),
        TransformId::VMovement2 => segmented_with(c, |c| {
            c.verb.form == VerbShape::Finite
                && c.verb.modal.is_some()
                && matches!(&c.layout, Layout::Segmented(r) if r.contains(&SegmentRole::Modal))
        }),
    }
}

/// Applies one rule. The input is left untouched.
pub fn apply_rule(id: TransformId, c: &Clause) -> Result<Clause, TransformError> {
    if !applicable(id, c) {
        return Err(TransformError::NotApplicable(id));
    }
    let mut out = c.clone();
    out.omega_tag = None;
    match id {
        TransformId::Extraposition => extrapose(&mut out),
        TransformId::IMovement => out.clause_type = ClauseType::Interrogative,
        TransformId::NpPassive1 | TransformId::NpPassive3 => passivize(&mut out),
        TransformId::NpPassive2 => expand_small_clause(&mut out),
        TransformId::NpRaising1 => raise(&mut out),
        TransformId::NpRaising2 => lower(&mut out),
        TransformId::NpRaising3 => {
            if raising3_lowers(c) {
                lower(&mut out)
            } else {
                raise(&mut out)
            }
        }
        TransformId::VMovement1 => {
            out.layout = Layout::Normal;
            out.verb.form = VerbShape::Finite;
        }
        TransformId::VMovement2 => out.layout = Layout::Normal,
    }
    Ok(out)
}

fn extrapose(c: &mut Clause) {
    if let Subject::Np(np) = &mut c.subject {
        if let Some(pp) = np.pp_modifiers.pop() {
            c.adjuncts.push(Adjunct::Prep(pp));
        }
    }
}

/// Promotes the object to subject and demotes the subject to a by-phrase.
/// On a raised clause the object of the embedded infinitive is promoted.
fn passivize(c: &mut Clause) {
    let Subject::Np(agent) = std::mem::replace(&mut c.subject, Subject::Empty) else {
        unreachable!("passive precondition requires an NP subject")
    };
    let target: &mut Clause = if c.verb.is_raising() {
        c.complements
            .iter_mut()
            .find_map(|x| match x {
                Complement::ToInfinitive(inner) if inner.subject == Subject::Empty => Some(inner.as_mut()),
                _ => None,
            })
            .expect("raised complement checked by precondition")
    } else {
        c
    };
    let pos = target
        .complements
        .iter()
        .position(|x| matches!(x, Complement::Object(_)))
        .expect("object checked by precondition");
    let Complement::Object(patient) = target.complements.remove(pos) else {
        unreachable!()
    };
    target.verb.voice = Voice::Passive;
    target.complements.push(Complement::ByPhrase(agent));
    c.subject = Subject::Np(patient);
}

fn expand_small_clause(c: &mut Clause) {
    for comp in &mut c.complements {
        if let Complement::SmallClause(np, adj) = comp {
            let mut verb = crate::syntax::VerbGroup::finite("be", c.verb.tense);
            verb.form = VerbShape::ToInfinitive;
            let inner = Clause::new(Subject::Np(np.clone()), verb)
                .with_complement(Complement::PredicateAdj(adj.clone()));
            *comp = Complement::ToInfinitive(Box::new(inner));
            break;
        }
    }
}

/// `It V that NP VP` → `NP V to VP`. An embedded modal is dropped.
fn raise(c: &mut Clause) {
    let matrix_tense = c.verb.tense;
    let pos = c
        .complements
        .iter()
        .position(|x| matches!(x, Complement::ThatClause(_)))
        .expect("that-clause checked by precondition");
    let Complement::ThatClause(mut inner) = c.complements.remove(pos) else {
        unreachable!()
    };
    c.subject = std::mem::replace(&mut inner.subject, Subject::Empty);
    inner.verb.modal = None;
    inner.verb.form = VerbShape::ToInfinitive;
    inner.verb.tense = matrix_tense;
    c.complements.insert(pos, Complement::ToInfinitive(inner));
}

/// `NP V (to NP2) to VP` → `It V (to NP2) that NP VP`.
fn lower(c: &mut Clause) {
    let matrix_tense = c.verb.tense;
    let subject = std::mem::replace(&mut c.subject, Subject::ExpletiveIt);
    let pos = c
        .complements
        .iter()
        .position(|x| matches!(x, Complement::ToInfinitive(inner) if inner.subject == Subject::Empty))
        .expect("raised complement checked by precondition");
    let Complement::ToInfinitive(mut inner) = c.complements.remove(pos) else {
        unreachable!()
    };
    inner.subject = subject;
    inner.verb.form = VerbShape::Finite;
    inner.verb.tense = matrix_tense;
    c.complements.insert(pos, Complement::ThatClause(inner));
}

/// Applies `ids` left to right, recording every intermediate clause.
pub fn compose(ids: &[TransformId], c: &Clause) -> CompositionResult {
    let mut intermediates = Vec::new();
    let mut current = c.clone();
    for (step, &id) in ids.iter().enumerate() {
        match apply_rule(id, &current) {
            Ok(next) => {
                if step > 0 {
                    intermediates.push(std::mem::replace(&mut current, next));
                } else {
                    current = next;
                }
            }
            Err(_) => {
                return CompositionResult {
                    intermediates,
                    final_clause: current,
                    status: CompositionStatus::Absorbed(step),
                }
            }
        }
    }
    CompositionResult { intermediates, final_clause: current, status: CompositionStatus::Ok }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::lexicon::Lexicon;
    use crate::syntax::{build_clause, render, Binding, TemplateSet};

    fn build(template: &str, binds: &[(&str, Binding)]) -> Clause {
        let lex = Lexicon::shipped();
        let set = TemplateSet::shipped();
        let map: HashMap<String, Binding> =
            binds.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        build_clause(&lex, set.get(template).unwrap(), &map).unwrap()
    }

    fn text(c: &Clause) -> String {
        render(&Lexicon::shipped(), c).unwrap().text
    }

    fn active() -> Clause {
        build(
            "p1.past",
            &[("subj", Binding::sg("teacher")), ("verb", Binding::word("grade")), ("obj", Binding::pl("exam"))],
        )
    }

    #[test]
    fn applicability_examples() {
        let c = active();
        assert!(applicable(TransformId::NpPassive1, &c));
        let passive = apply_rule(TransformId::NpPassive1, &c).unwrap();
        assert!(!applicable(TransformId::NpPassive1, &passive));
        let modal = build(
            "imove.modal.pro",
            &[("subj", Binding::word("she")), ("m", Binding::word("can")), ("verb", Binding::word("swim"))],
        );
        assert!(applicable(TransformId::IMovement, &modal));
    }

    #[test]
    fn apply_leaves_input_untouched() {
        let c = active();
        let before = c.clone();
        let _ = apply_rule(TransformId::NpPassive1, &c).unwrap();
        assert_eq!(c, before);
    }

    #[test]
    fn not_applicable_is_an_error() {
        let c = active();
        assert_eq!(
            apply_rule(TransformId::NpRaising2, &c),
            Err(TransformError::NotApplicable(TransformId::NpRaising2))
        );
    }

    #[test]
    fn double_passive_is_absorbed_at_step_one() {
        let r = compose(&[TransformId::NpPassive1, TransformId::NpPassive1], &active());
        assert_eq!(r.status, CompositionStatus::Absorbed(1));
        assert!(r.intermediates.is_empty());
        assert_eq!(text(&r.final_clause), "The exams were graded by the teacher.");
    }

    #[test]
    fn compose_records_intermediates() {
        let c = build(
            "p3.particle",
            &[
                ("subj", Binding::sg("baker")),
                ("verb", Binding::word("take")),
                ("obj", Binding::sg("muffin")),
                ("adv", Binding::word("away")),
            ],
        );
        assert_eq!(text(&c), "The baker took the muffin away.");
        let r = compose(&[TransformId::NpPassive3, TransformId::IMovement], &c);
        assert_eq!(r.status, CompositionStatus::Ok);
        assert_eq!(r.intermediates.len(), 1);
        assert_eq!(text(&r.intermediates[0]), "The muffin was taken away by the baker.");
        assert_eq!(text(&r.final_clause), "Was the muffin taken away by the baker?");
    }

    #[test]
    fn raising_inverse_pair() {
        let c = build(
            "r1.cop.proper",
            &[("who", Binding::word("John")), ("rv", Binding::word("seem")), ("adj", Binding::word("happy"))],
        );
        let raised = apply_rule(TransformId::NpRaising1, &c).unwrap();
        assert_eq!(text(&raised), "John seems to be happy.");
        let back = apply_rule(TransformId::NpRaising2, &raised).unwrap();
        assert!(crate::syntax::clause_equal(&back, &c));
        assert!(!crate::syntax::clause_equal(&raised, &c));
    }

    #[test]
    fn will_is_dropped_when_raising() {
        let c = build(
            "r1.will",
            &[("subj", Binding::sg("weather")), ("rv", Binding::word("appear")), ("verb", Binding::word("improve"))],
        );
        assert_eq!(text(&c), "It appears that the weather will improve.");
        let raised = apply_rule(TransformId::NpRaising1, &c).unwrap();
        assert_eq!(text(&raised), "The weather appears to improve.");
    }

    #[test]
    fn raising_rules_are_not_self_composable() {
        let r3 = build(
            "r3.exp.proper",
            &[("who", Binding::word("John")), ("exp", Binding::word("I")), ("adj", Binding::word("honest"))],
        );
        let lowered = apply_rule(TransformId::NpRaising3, &r3).unwrap();
        assert!(!applicable(TransformId::NpRaising3, &lowered));
        let r2 = apply_rule(TransformId::NpRaising1, &build(
            "r1.cop.proper",
            &[("who", Binding::word("Mary")), ("rv", Binding::word("seem")), ("adj", Binding::word("tired"))],
        ))
        .unwrap();
        let expletive = apply_rule(TransformId::NpRaising2, &r2).unwrap();
        assert!(!applicable(TransformId::NpRaising2, &expletive));
    }
}
