mod common;

use std::collections::HashSet;

use amrlogic::lexicon::{load_lexicon, Lexicon};
use amrlogic::synth::{
    alter_pararule_rules, build_corpus, generate_atomic, CorpusConfig, Mix, PararuleRecord, PatternKind, SynthError,
};
use amrlogic::{applicable_laws, parse_penman, parse_sentence};
use proptest::prelude::*;

fn default_corpus() -> Vec<amrlogic::synth::SynthSentence> {
    build_corpus(&Lexicon::default_lexicon(), &CorpusConfig::default()).unwrap()
}

#[test]
fn default_corpus_is_unique_and_augmentable() {
    let lex = Lexicon::default_lexicon();
    let corpus = default_corpus();
    assert_eq!(corpus.len(), 14_962);
    let texts: HashSet<String> = corpus.iter().map(|s| s.text.to_lowercase()).collect();
    assert_eq!(texts.len(), corpus.len());
    for s in corpus.iter().step_by(7) {
        assert!(!applicable_laws(&s.graph, &lex).is_empty(), "{}", s.text);
        assert_eq!(parse_sentence(&s.text).unwrap(), s.graph);
        let rec = s.to_record();
        assert_eq!(parse_penman(&rec.penman).unwrap(), s.graph);
    }
}

#[test]
fn corpus_is_seed_deterministic() {
    let lex = Lexicon::default_lexicon();
    let cfg = |seed| CorpusConfig {
        target: 300,
        seed,
        ..CorpusConfig::default()
    };
    let a = build_corpus(&lex, &cfg(7)).unwrap();
    assert_eq!(a, build_corpus(&lex, &cfg(7)).unwrap());
    assert_ne!(a, build_corpus(&lex, &cfg(8)).unwrap());
}

#[test]
fn atomic_family_alone_reproduces_the_full_grid() {
    let lex = Lexicon::default_lexicon();
    let cfg = CorpusConfig {
        target: 1840,
        mix: Mix::only(PatternKind::AtomicDn),
        seed: 1,
        augmentable_only: false,
    };
    let mut a: Vec<String> = build_corpus(&lex, &cfg).unwrap().into_iter().map(|s| s.text).collect();
    let mut b: Vec<String> = generate_atomic(&lex).unwrap().into_iter().map(|s| s.text).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn unreachable_targets_fail() {
    let lex = Lexicon::default_lexicon();
    let cfg = CorpusConfig {
        target: 1_000_000_000,
        ..CorpusConfig::default()
    };
    assert!(matches!(build_corpus(&lex, &cfg), Err(SynthError::Unreachable { .. })));
}

#[test]
fn lexicon_from_disk_matches_builtin() {
    let lex = Lexicon::default_lexicon();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lex.tsv");
    std::fs::write(&path, lex.to_tsv()).unwrap();
    assert_eq!(load_lexicon(&path).unwrap().checksum(), lex.checksum());
}

#[test]
fn smaller_lexicon_shrinks_the_grid() {
    let lex = Lexicon::default_lexicon()
        .with_entities(vec!["Alan".into(), "the wolf".into()])
        .with_attributes(vec!["strong".into(), "kind".into(), "round".into()]);
    assert_eq!(generate_atomic(&lex).unwrap().len(), 2 * 2 * 3);
}

fn pararule(name: &str) -> (PararuleRecord, Vec<String>) {
    let text = std::fs::read_to_string(common::fixture(&format!("{name}.jsonl"))).unwrap();
    let rec: PararuleRecord = serde_json::from_str(text.trim()).unwrap();
    let expected = std::fs::read_to_string(common::fixture(&format!("{name}.expected.json"))).unwrap();
    (rec, serde_json::from_str(&expected).unwrap())
}

#[test]
fn pararule_figures_verbatim() {
    let (d1, want1) = pararule("pararule_depth1");
    let out = alter_pararule_rules(&d1.rules, 1, d1.altered_indices.as_deref()).unwrap();
    assert_eq!(out.rules, want1);
    assert!(out.warnings.is_empty());
    let (d2, want2) = pararule("pararule_depth2");
    let out = alter_pararule_rules(&d2.rules, 2, d2.altered_indices.as_deref()).unwrap();
    assert_eq!(out.rules, want2);
}

proptest! {
    #[test]
    fn mix_text_round_trips(w in prop::collection::vec(0.0f64..1.0, 4)) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 0.01);
        let parts: Vec<(PatternKind, f64)> = PatternKind::ALL.iter().copied().zip(w.iter().map(|x| x / total)).collect();
        let Ok(mix) = Mix::new(parts) else { return Ok(()) };
        let back: Mix = mix.to_string().parse().unwrap();
        for p in PatternKind::ALL {
            prop_assert!((back.fraction(p) - mix.fraction(p)).abs() < 1e-9);
        }
    }
}

proptest! {
    // Each case builds every family pool.
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn corpus_hits_any_reachable_target(target in 1usize..400, seed in any::<u64>()) {
        let lex = Lexicon::default_lexicon();
        let cfg = CorpusConfig { target, seed, ..CorpusConfig::default() };
        let c = build_corpus(&lex, &cfg).unwrap();
        prop_assert_eq!(c.len(), target);
        let texts: HashSet<&str> = c.iter().map(|s| s.text.as_str()).collect();
        prop_assert_eq!(texts.len(), target);
    }
}
