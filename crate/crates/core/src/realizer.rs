//! Rule-based text <-> AMR conversion for the controlled grammar, and a
//! Penman block-file bridge for external converters.

use std::path::Path;

use thiserror::Error;

use crate::amr::{parse_blocks, write_blocks, AmrGraph, BlockResult};
use crate::grammar::{Clause, Predicate, Shape, Subject, UnsupportedStructure};

#[derive(Debug, Error)]
pub enum RealizerError {
    #[error("outside grammar: {0}")]
    OutsideGrammar(String),
    #[error(transparent)]
    Unsupported(#[from] UnsupportedStructure),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

const NOT_THE_CASE: &str = "it is not the case that ";

/// Parses a controlled-grammar sentence into its shape.
pub fn parse_shape(text: &str) -> Result<Shape, RealizerError> {
    let outside = || RealizerError::OutsideGrammar(text.trim().to_string());
    let mut s = text.trim().replace(['\u{2019}', '\u{2018}'], "'");
    while s.ends_with('.') {
        s.pop();
    }
    let mut s = s.trim();
    for lead in ["and ", "but ", "so "] {
        if starts_with_ci(s, lead) {
            s = s[lead.len()..].trim_start();
            break;
        }
    }
    if s.is_empty() {
        return Err(outside());
    }
    if starts_with_ci(s, NOT_THE_CASE) {
        return parse_clause(s).map(Shape::Atomic).ok_or_else(outside);
    }
    if starts_with_ci(s, "if ") {
        let body = &s[3..];
        for sep in [", then ", " then ", ", "] {
            for (i, _) in body.match_indices(sep) {
                if let (Some(a), Some(c)) = (parse_clause(&body[..i]), parse_clause(&body[i + sep.len()..])) {
                    return Ok(Shape::IfThen {
                        antecedent: a,
                        consequent: c,
                    });
                }
            }
        }
        return Err(outside());
    }
    for (i, _) in s.match_indices(" if ") {
        if let (Some(c), Some(a)) = (parse_clause(&s[..i]), parse_clause(&s[i + 4..])) {
            return Ok(Shape::IfThen {
                antecedent: a,
                consequent: c,
            });
        }
    }
    // "X unless Y" reads as "if not Y, then X".
    for (i, _) in s.match_indices(" unless ") {
        if let (Some(c), Some(a)) = (parse_clause(&s[..i]), parse_clause(&s[i + 8..])) {
            return Ok(Shape::IfThen {
                antecedent: a.toggled(),
                consequent: c,
            });
        }
    }
    for (sep, and) in [(" and ", true), (" or ", false)] {
        for (i, _) in s.match_indices(sep) {
            if let (Some(a), Some(b)) = (parse_clause(&s[..i]), parse_clause(&s[i + sep.len()..])) {
                return Ok(if and { Shape::And(a, b) } else { Shape::Or(a, b) });
            }
        }
    }
    parse_clause(s).map(Shape::Atomic).ok_or_else(outside)
}

pub fn parse_sentence(text: &str) -> Result<AmrGraph, RealizerError> {
    parse_shape(text).map(|s| s.to_graph())
}

pub fn realize(graph: &AmrGraph) -> Result<String, RealizerError> {
    Ok(Shape::from_graph(graph)?.realize())
}

/// Canonical surface form of an in-grammar sentence.
pub fn canonical(text: &str) -> Result<String, RealizerError> {
    parse_shape(text).map(|s| s.realize())
}

fn starts_with_ci(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len() && s.is_char_boundary(prefix.len()) && s[..prefix.len()].eq_ignore_ascii_case(prefix)
}

const VERBS: &[&str] = &[
    "is", "are", "am", "was", "were", "isn't", "aren't", "wasn't", "weren't", "will", "won't", "has", "have", "had",
    "do", "does", "did", "don't", "doesn't", "didn't",
];

fn parse_clause(text: &str) -> Option<Clause> {
    let text = text.trim().trim_end_matches(',').trim_end();
    if starts_with_ci(text, NOT_THE_CASE) {
        return parse_clause(&text[NOT_THE_CASE.len()..]).map(|c| c.toggled());
    }
    let words: Vec<&str> = text.split_whitespace().collect();
    let v = words
        .iter()
        .position(|w| VERBS.contains(&w.to_ascii_lowercase().as_str()))?;
    if v == 0 {
        return None;
    }
    let subject = Subject::from_words(&words[..v])?;
    let lower: Vec<String> = words[v..].iter().map(|w| w.to_ascii_lowercase()).collect();
    let lower: Vec<&str> = lower.iter().map(String::as_str).collect();
    let rest = &words[v..];
    let (predicate, negated) = parse_predicate(&lower, rest)?;
    Some(Clause::new(subject, predicate, negated))
}

fn parse_predicate(lower: &[&str], orig: &[&str]) -> Option<(Predicate, bool)> {
    let join = |from: usize| -> Option<String> {
        let s = orig.get(from..)?.join(" ");
        (!s.is_empty()).then_some(s)
    };
    match lower {
        [cop, rest @ ..] if matches!(*cop, "is" | "are" | "am" | "was" | "were") => {
            let (neg, at) = if rest.first() == Some(&"not") { (true, 2) } else { (false, 1) };
            copula_tail(&lower[at..], at, neg, &join)
        }
        [cop, ..] if matches!(*cop, "isn't" | "aren't" | "wasn't" | "weren't") => {
            copula_tail(&lower[1..], 1, true, &join)
        }
        ["will", "not", "be", "able", "to", ..] => Some((Predicate::Able(join(5)?), true)),
        ["will", "be", "able", "to", ..] => Some((Predicate::Able(join(4)?), false)),
        ["won't", "be", "able", "to", ..] => Some((Predicate::Able(join(4)?), true)),
        [have, "no", ..] if matches!(*have, "has" | "have" | "had") => Some((Predicate::Have(noun_phrase(&orig[2..])?), true)),
        [have, ..] if matches!(*have, "has" | "have" | "had") => Some((Predicate::Have(noun_phrase(&orig[1..])?), false)),
        [aux, "not", "have", ..] if matches!(*aux, "do" | "does" | "did") => {
            Some((Predicate::Have(noun_phrase(&orig[3..])?), true))
        }
        [aux, "have", ..] if matches!(*aux, "don't" | "doesn't" | "didn't") => {
            Some((Predicate::Have(noun_phrase(&orig[2..])?), true))
        }
        _ => None,
    }
}

fn copula_tail(
    tail: &[&str],
    at: usize,
    neg: bool,
    join: &dyn Fn(usize) -> Option<String>,
) -> Option<(Predicate, bool)> {
    match tail {
        ["able", "to", _, ..] => Some((Predicate::Able(join(at + 2)?), neg)),
        [adj] if crate::grammar::is_lower_word(adj) && *adj != "not" => Some((Predicate::Adjective(adj.to_string()), neg)),
        _ => None,
    }
}

/// Drops quantifier padding: "at least some", "some", "any", trailing "at all".
fn noun_phrase(words: &[&str]) -> Option<String> {
    let mut w = words;
    let lower = |w: &[&str]| w.iter().map(|s| s.to_ascii_lowercase()).collect::<Vec<_>>();
    let l = lower(w);
    if l.len() >= 3 && l[..3] == ["at", "least", "some"] {
        w = &w[3..];
    } else if matches!(l.first().map(String::as_str), Some("some" | "any")) {
        w = &w[1..];
    }
    let l = lower(w);
    if l.len() >= 2 && l[l.len() - 2..] == ["at", "all"] {
        w = &w[..w.len() - 2];
    }
    if w.is_empty() || w.iter().any(|t| t.eq_ignore_ascii_case("not")) {
        return None;
    }
    Some(w.join(" "))
}

pub fn bridge_export(graphs: &[AmrGraph], path: &Path) -> Result<(), RealizerError> {
    std::fs::write(path, write_blocks(graphs)).map_err(|source| RealizerError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a Penman block file; malformed blocks are reported individually.
pub fn bridge_import(path: &Path) -> Result<Vec<BlockResult>, RealizerError> {
    let text = std::fs::read_to_string(path).map_err(|source| RealizerError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_blocks(&text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round(text: &str) -> String {
        realize(&parse_sentence(text).unwrap()).unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(round("If Alan is kind, then Bob is clever."), "If Alan is kind, then Bob is clever.");
        assert_eq!(round("Alan isn't kind if Bob isn't clever."), "If Bob is not clever, then Alan is not kind.");
        assert_eq!(round("If Dave is short, the bald eagle is not kind."), "If Dave is short, then the bald eagle is not kind.");
        assert_eq!(round("The bald eagle is clever and the wolf is fierce."), "The bald eagle is clever and the wolf is fierce.");
        assert_eq!(round("the bear is not sleepy or Bob is not cute"), "The bear is not sleepy or Bob is not cute.");
        assert_eq!(round("The dinosaur was not angry and the lion was thin."), "The dinosaur is not angry and the lion is thin.");
    }

    #[test]
    fn unless_reads_as_negated_condition() {
        assert_eq!(
            round("The bald eagle isn't small, unless the mouse is small."),
            "If the mouse is not small, then the bald eagle is not small."
        );
    }

    #[test]
    fn not_the_case_wrapper() {
        assert_eq!(round("It is not the case that it is not raining."), "It is raining.");
        assert!(parse_shape("It is not the case that Alan is kind and Bob is clever.").is_err());
    }

    #[test]
    fn verb_phrase_clauses() {
        assert_eq!(
            round("If you have no keyboarding skills at all, you will not be able to use a computer."),
            "If you have no keyboarding skills, then you are not able to use a computer."
        );
        assert_eq!(
            round("And if you are not able to use a computer, you will not be able to write your essays using a word processing program."),
            "If you are not able to use a computer, then you are not able to write your essays using a word processing program."
        );
        assert_eq!(round("Bob doesn't have any friends."), "Bob has no friends.");
        assert_eq!(round("You have at least some keyboarding skills."), "You have keyboarding skills.");
    }

    #[test]
    fn rejections() {
        for text in [
            "Bob can write essays.",
            "",
            "Alan is very kind.",
            "The bald eagle is.",
            "is kind",
            "alan is kind.",
            "If Alan is kind Bob is clever.",
        ] {
            assert!(
                matches!(parse_sentence(text), Err(RealizerError::OutsideGrammar(_))),
                "{text:?}"
            );
        }
    }

    #[test]
    fn outside_grammar_message() {
        let e = parse_sentence("Bob can write essays.").unwrap_err();
        assert_eq!(e.to_string(), "outside grammar: Bob can write essays.");
    }
}
