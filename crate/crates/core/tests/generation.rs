use std::collections::HashSet;

use proptest::prelude::*;
use tgforge_core::datasetgen::{
    filter_records, read_jsonl, render_prompt, write_jsonl, GenSpec, Generator, PromptMode, RecordFilter,
};
use tgforge_core::syntax::{clause_equal, TemplateSet};
use tgforge_core::{apply_rule, compose, render, Lexicon, TransformId};

fn fixture() -> (Lexicon, TemplateSet) {
    (Lexicon::shipped(), TemplateSet::shipped())
}

#[test]
fn every_rule_generates_in_domain_records() {
    let (lex, set) = fixture();
    let gen = Generator::new(&lex, &set);
    for rule in TransformId::ALL {
        let recs = gen.generate_single(rule, 40, 3).unwrap();
        assert_eq!(recs.len(), 40, "{rule}");
        for r in &recs {
            let (base, mids, fin) = gen.regenerate(r).expect("regenerates");
            assert!(mids.is_empty());
            assert_eq!(render(&lex, &base).unwrap().text, r.input);
            assert_eq!(render(&lex, &fin).unwrap().text, r.output);
            let again = apply_rule(rule, &base).unwrap();
            assert!(clause_equal(&again, &fin));
        }
    }
}

#[test]
fn nested_records_chain_through_the_intermediate() {
    let (lex, set) = fixture();
    let gen = Generator::new(&lex, &set);
    let spec = GenSpec::desk_scale(9);
    for seq in spec.all_nested() {
        let recs = gen.generate_nested(&seq.0, 15, 9).unwrap();
        for r in &recs {
            let (base, mids, fin) = gen.regenerate(r).unwrap();
            assert_eq!(render(&lex, &mids[0]).unwrap().text, r.intermediates[0]);
            let step2 = apply_rule(seq.0[1], &mids[0]).unwrap();
            assert!(clause_equal(&step2, &fin), "{}", r.id);
            assert_eq!(compose(&seq.0, &base).final_clause, fin);
        }
    }
}

#[test]
fn records_pass_the_filter_and_survive_a_round_trip() {
    let (lex, set) = fixture();
    let gen = Generator::new(&lex, &set);
    let recs = gen.generate_single(TransformId::NpPassive1, 100, 4).unwrap();
    let vocab = lex.vocabulary();
    let kept = filter_records(recs.clone(), &vocab);
    assert_eq!(kept.len(), recs.len());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p1.jsonl");
    assert_eq!(write_jsonl(&recs, &path).unwrap(), 100);
    assert_eq!(read_jsonl(&path).unwrap(), recs);
}

#[test]
fn filter_rejects_duplicate_inputs_and_unknown_words() {
    let (lex, set) = fixture();
    let gen = Generator::new(&lex, &set);
    let rec = gen.generate_single(TransformId::IMovement, 1, 5).unwrap().remove(0);
    let vocab = lex.vocabulary();
    let mut filter = RecordFilter::new(&vocab, true);
    assert!(filter.accept(&rec));
    assert!(!filter.accept(&rec));
    let mut odd = rec.clone();
    odd.output = format!("{} quokka", odd.output);
    assert!(!RecordFilter::new(&vocab, true).accept(&odd));
}

#[test]
fn inference_prompt_is_a_prefix_of_the_training_prompt() {
    let (lex, set) = fixture();
    let gen = Generator::new(&lex, &set);
    let recs = gen.generate_nested(&[TransformId::NpPassive3, TransformId::IMovement], 10, 2).unwrap();
    for r in &recs {
        let train = render_prompt(r, PromptMode::Train, true);
        let infer = render_prompt(r, PromptMode::Inference, true);
        assert!(train.starts_with(&infer), "{infer:?} / {train:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generation_is_a_function_of_the_seed(seed in any::<u64>(), idx in 0usize..10) {
        let (lex, set) = fixture();
        let gen = Generator::new(&lex, &set);
        let rule = TransformId::ALL[idx];
        let a = gen.generate_single(rule, 8, seed).unwrap();
        let b = gen.generate_single(rule, 8, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let inputs: HashSet<String> = a.iter().map(|r| r.input.to_lowercase()).collect();
        prop_assert_eq!(inputs.len(), a.len());
    }

    #[test]
    fn out_of_domain_application_is_an_error(seed in any::<u64>(), src in 0usize..10, dst in 0usize..10) {
        let (lex, set) = fixture();
        let gen = Generator::new(&lex, &set);
        if let Some((clause, _)) = gen.base_clause(TransformId::ALL[src], seed) {
            let rule = TransformId::ALL[dst];
            match apply_rule(rule, &clause) {
                Ok(out) => prop_assert!(render(&lex, &out).is_ok()),
                Err(_) => prop_assert!(!tgforge_core::applicable(rule, &clause)),
            }
        }
    }
}
