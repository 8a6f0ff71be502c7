//! Prompt augmentation for ReClor / LogiQA style multiple-choice records.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::laws::{apply_law, applicable_laws, LawKind};
use crate::lexicon::Lexicon;
use crate::realizer::{parse_sentence, realize};

pub const DEFAULT_LAWS: [LawKind; 2] = [LawKind::Contraposition, LawKind::Implication];

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("record has {0} answers, expected 4")]
    AnswerCount(usize),
    #[error("label {0} out of range")]
    LabelRange(i64),
    #[error("unknown format `{0}` (expected reclor or logiqa)")]
    UnknownFormat(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McqRecord {
    pub context: String,
    pub question: String,
    pub answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<i64>,
    #[serde(default)]
    pub id_string: String,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, Value>,
}

impl McqRecord {
    pub fn validate(&self) -> Result<(), PromptError> {
        if self.answers.len() != 4 {
            return Err(PromptError::AnswerCount(self.answers.len()));
        }
        if let Some(l) = self.label {
            if !(0..4).contains(&l) {
                return Err(PromptError::LabelRange(l));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// One JSON array.
    Reclor,
    /// One JSON object per line.
    Logiqa,
}

impl FromStr for Format {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "reclor" => Ok(Format::Reclor),
            "logiqa" => Ok(Format::Logiqa),
            _ => Err(PromptError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rewrite {
    pub law: LawKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    /// `context:N` or `option:N`.
    pub source: String,
    pub original: String,
    pub rewrites: Vec<Rewrite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AugmentationTrace {
    #[serde(default)]
    pub id_string: String,
    pub rows: Vec<TraceRow>,
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "u.s", "u.k", "inc", "co", "no", "fig",
];

/// Splits on `. `, `? ` and `! `, not after common abbreviations or single
/// initials.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if !matches!(b, b'.' | b'?' | b'!') {
            continue;
        }
        let at_end = i + 1 == bytes.len();
        if !at_end && !bytes[i + 1].is_ascii_whitespace() {
            continue;
        }
        if b == b'.' {
            let word = text[start..i].rsplit(|c: char| c.is_whitespace()).next().unwrap_or("");
            let w = word.trim_start_matches(['(', '"', '\'']).to_ascii_lowercase();
            let initial = w.len() == 1 && w.chars().all(|c| c.is_ascii_alphabetic());
            if ABBREVIATIONS.contains(&w.as_str()) || initial {
                continue;
            }
        }
        let s = text[start..=i].trim();
        if !s.is_empty() {
            out.push(s.to_string());
        }
        start = i + 1;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}

/// Requested laws that apply to `text`, in fixed order, with their rewrites.
/// `Err` carries the skip reason.
fn rewrites_for(text: &str, lexicon: &Lexicon, laws: &BTreeSet<LawKind>) -> Result<Vec<Rewrite>, String> {
    if split_sentences(text).len() > 1 {
        return Err("more than one sentence".into());
    }
    let graph = parse_sentence(text).map_err(|e| e.to_string())?;
    let applicable = applicable_laws(&graph, lexicon);
    let mut out = Vec::new();
    for law in LawKind::ALL {
        if !laws.contains(&law) || !applicable.contains(&law) {
            continue;
        }
        let outcome = apply_law(law, &graph, lexicon).map_err(|e| e.to_string())?;
        let text = realize(&outcome.positive).map_err(|e| e.to_string())?;
        out.push(Rewrite { law, text });
    }
    if out.is_empty() {
        return Err("no requested law applies".into());
    }
    Ok(out)
}

fn append(base: &str, extra: &[&str]) -> String {
    let mut present: BTreeSet<String> = split_sentences(base).into_iter().collect();
    let mut out = base.trim_end().to_string();
    for s in extra {
        if present.insert(s.to_string()) {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(s);
        }
    }
    out
}

/// Appends equivalent rewrites to every option: the option's own rewrites,
/// then the context rewrites (law-major, then sentence order). Context,
/// question and label are left as they are.
pub fn augment_record(
    record: &McqRecord,
    lexicon: &Lexicon,
    laws: &BTreeSet<LawKind>,
) -> Result<(McqRecord, AugmentationTrace), PromptError> {
    record.validate()?;
    let mut trace = AugmentationTrace {
        id_string: record.id_string.clone(),
        rows: Vec::new(),
    };
    let mut context_by_law: BTreeMap<LawKind, Vec<String>> = BTreeMap::new();
    for (i, sentence) in split_sentences(&record.context).into_iter().enumerate() {
        let row = match rewrites_for(&sentence, lexicon, laws) {
            Ok(rw) => {
                for r in &rw {
                    context_by_law.entry(r.law).or_default().push(r.text.clone());
                }
                TraceRow {
                    source: format!("context:{i}"),
                    original: sentence,
                    rewrites: rw,
                    skipped: None,
                }
            }
            Err(reason) => TraceRow {
                source: format!("context:{i}"),
                original: sentence,
                rewrites: Vec::new(),
                skipped: Some(reason),
            },
        };
        trace.rows.push(row);
    }
    let context_rewrites: Vec<String> = context_by_law.into_values().flatten().collect();

    let mut out = record.clone();
    for (k, option) in record.answers.iter().enumerate() {
        let own = match rewrites_for(option, lexicon, laws) {
            Ok(rw) => {
                let texts: Vec<String> = rw.iter().map(|r| r.text.clone()).collect();
                trace.rows.push(TraceRow {
                    source: format!("option:{k}"),
                    original: option.clone(),
                    rewrites: rw,
                    skipped: None,
                });
                texts
            }
            Err(reason) => {
                trace.rows.push(TraceRow {
                    source: format!("option:{k}"),
                    original: option.clone(),
                    rewrites: Vec::new(),
                    skipped: Some(reason),
                });
                Vec::new()
            }
        };
        let extra: Vec<&str> = own.iter().chain(&context_rewrites).map(String::as_str).collect();
        out.answers[k] = append(option, &extra);
    }
    Ok((out, trace))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AugmentSummary {
    pub records: usize,
    pub schema_mismatches: usize,
    pub sentences: usize,
    pub skipped_sentences: usize,
    pub augmented_per_law: BTreeMap<String, usize>,
    pub skip_rate: f64,
}

fn read_values(path: &Path, format: Format) -> Result<Vec<Value>, PromptError> {
    let text = std::fs::read_to_string(path).map_err(|source| PromptError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let parse_err = |message: String| PromptError::Parse {
        path: path.display().to_string(),
        message,
    };
    match format {
        Format::Reclor => match serde_json::from_str::<Value>(&text).map_err(|e| parse_err(e.to_string()))? {
            Value::Array(items) => Ok(items),
            _ => Err(parse_err("expected a JSON array".into())),
        },
        Format::Logiqa => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| parse_err(format!("line {}: {e}", i + 1))))
            .collect(),
    }
}

/// Augments a whole file. Records that do not fit the schema are written
/// back unchanged and counted.
pub fn augment_values(
    values: Vec<Value>,
    lexicon: &Lexicon,
    laws: &BTreeSet<LawKind>,
) -> (Vec<Value>, Vec<AugmentationTrace>, AugmentSummary) {
    let mut summary = AugmentSummary::default();
    let mut out = Vec::with_capacity(values.len());
    let mut traces = Vec::new();
    for v in values {
        summary.records += 1;
        let parsed = serde_json::from_value::<McqRecord>(v.clone())
            .map_err(|e| e.to_string())
            .and_then(|r| augment_record(&r, lexicon, laws).map_err(|e| e.to_string()));
        match parsed {
            Ok((rec, trace)) => {
                for row in &trace.rows {
                    summary.sentences += 1;
                    if row.skipped.is_some() {
                        summary.skipped_sentences += 1;
                    }
                    for r in &row.rewrites {
                        *summary.augmented_per_law.entry(r.law.name().to_string()).or_default() += 1;
                    }
                }
                out.push(serde_json::to_value(rec).expect("record serializes"));
                traces.push(trace);
            }
            Err(reason) => {
                log::warn!("record {} passed through: {reason}", summary.records - 1);
                summary.schema_mismatches += 1;
                out.push(v);
            }
        }
    }
    summary.skip_rate = if summary.sentences == 0 {
        0.0
    } else {
        summary.skipped_sentences as f64 / summary.sentences as f64
    };
    (out, traces, summary)
}

pub fn write_values(values: &[Value], path: &Path, format: Format) -> Result<(), PromptError> {
    let body = match format {
        Format::Reclor => serde_json::to_string_pretty(values).expect("values serialize") + "\n",
        Format::Logiqa => values
            .iter()
            .map(|v| serde_json::to_string(v).expect("value serializes") + "\n")
            .collect(),
    };
    std::fs::write(path, body).map_err(|source| PromptError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn augment_file(
    in_path: &Path,
    out_path: &Path,
    format: Format,
    lexicon: &Lexicon,
    laws: &BTreeSet<LawKind>,
) -> Result<(AugmentSummary, Vec<AugmentationTrace>), PromptError> {
    let values = read_values(in_path, format)?;
    let (out, traces, summary) = augment_values(values, lexicon, laws);
    write_values(&out, out_path, format)?;
    Ok((summary, traces))
}

pub fn read_records(path: &Path, format: Format) -> Result<Vec<Value>, PromptError> {
    read_values(path, format)
}
