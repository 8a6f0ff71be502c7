mod common;

use std::collections::BTreeSet;

use amrlogic::laws::LawKind;
use amrlogic::prompt::{augment_file, augment_values, read_records, split_sentences, Format, DEFAULT_LAWS};
use amrlogic::{equivalent, parse_sentence, to_formula, Lexicon};
use serde_json::Value;

fn laws() -> BTreeSet<LawKind> {
    DEFAULT_LAWS.into_iter().collect()
}

fn equivalent_text(a: &str, b: &str, lex: &Lexicon) -> bool {
    let f = |s: &str| to_formula(&parse_sentence(s).unwrap(), lex).unwrap();
    equivalent(&f(a), &f(b)).unwrap()
}

#[test]
fn keyboard_record_gains_the_contrapositive() {
    let lex = Lexicon::default_lexicon();
    let values = read_records(&common::fixture("reclor_sample.json"), Format::Reclor).unwrap();
    let (out, traces, _) = augment_values(values[..1].to_vec(), &lex, &laws());
    let option_b = out[0]["answers"][1].as_str().unwrap();
    let sentences = split_sentences(option_b);
    assert!(sentences.contains(
        &"If you have no keyboarding skills, then you are not able to write your essays using a word processing program."
            .to_string()
    ));
    for quoted in [
        "If you are able to use a computer, then you have keyboarding skills.",
        "If you are able to write your essays using a word processing program, then you are able to use a computer.",
    ] {
        assert!(
            sentences.iter().any(|s| parse_sentence(s).is_ok() && equivalent_text(s, quoted, &lex)),
            "{quoted}"
        );
    }
    assert_eq!(out[0]["context"], values[0]["context"]);
    assert_eq!(traces[0].rows.len(), 2 + 4);
}

#[test]
fn labels_and_answer_order_survive() {
    let lex = Lexicon::default_lexicon();
    for (name, format) in [("reclor_sample.json", Format::Reclor), ("logiqa_sample.jsonl", Format::Logiqa)] {
        let dir = tempfile::tempdir().unwrap();
        let out_path = dir.path().join(name);
        let (summary, traces) = augment_file(&common::fixture(name), &out_path, format, &lex, &laws()).unwrap();
        let before = read_records(&common::fixture(name), format).unwrap();
        let after = read_records(&out_path, format).unwrap();
        assert_eq!(before.len(), after.len());
        assert_eq!(summary.records, before.len());
        for ((b, a), t) in before.iter().zip(&after).zip(&traces) {
            assert_eq!(b["label"], a["label"]);
            assert_eq!(b["id_string"], a["id_string"]);
            let ba = b["answers"].as_array().unwrap();
            let aa = a["answers"].as_array().unwrap();
            assert_eq!(ba.len(), aa.len());
            for (x, y) in ba.iter().zip(aa) {
                assert!(y.as_str().unwrap().starts_with(x.as_str().unwrap()));
            }
            let context_sentences = split_sentences(b["context"].as_str().unwrap()).len();
            assert_eq!(t.rows.len(), context_sentences + ba.len());
        }
    }
}

#[test]
fn out_of_grammar_records_are_untouched() {
    let lex = Lexicon::default_lexicon();
    let values = read_records(&common::fixture("reclor_sample.json"), Format::Reclor).unwrap();
    let (out, traces, _) = augment_values(vec![values[2].clone()], &lex, &laws());
    assert_eq!(out[0], values[2]);
    assert!(traces[0].rows.iter().all(|r| r.rewrites.is_empty() && r.skipped.is_some()));
}

#[test]
fn every_appended_sentence_is_equivalent_to_its_source() {
    let lex = Lexicon::default_lexicon();
    let values = read_records(&common::fixture("reclor_sample.json"), Format::Reclor).unwrap();
    let (_, traces, _) = augment_values(values, &lex, &laws());
    for row in traces.iter().flat_map(|t| &t.rows) {
        for r in &row.rewrites {
            assert!(laws().contains(&r.law));
            assert!(equivalent_text(&row.original, &r.text, &lex), "{} / {}", row.original, r.text);
        }
    }
}

#[test]
fn full_validation_file_when_available() {
    let Ok(path) = std::env::var("RECLOR_VAL") else {
        return;
    };
    let lex = Lexicon::default_lexicon();
    let values = read_records(path.as_ref(), Format::Reclor).unwrap();
    let (out, _, summary) = augment_values(values.clone(), &lex, &laws());
    assert_eq!(summary.schema_mismatches, 0);
    for (b, a) in values.iter().zip(&out) {
        assert_eq!(b["label"], a["label"]);
        let n = b["answers"].as_array().map(Vec::len);
        assert_eq!(n, a["answers"].as_array().map(Vec::len));
    }
}

#[test]
fn schema_mismatch_passes_through() {
    let lex = Lexicon::default_lexicon();
    let odd: Value = serde_json::json!({"context": "Alan is kind.", "answers": ["x", "y"]});
    let (out, traces, summary) = augment_values(vec![odd.clone()], &lex, &laws());
    assert_eq!(out, vec![odd]);
    assert!(traces.is_empty());
    assert_eq!(summary.schema_mismatches, 1);
}
