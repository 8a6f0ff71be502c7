//! Contrastive pair construction, ratio control, stratified split and JSONL I/O.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::amr::AmrGraph;
use crate::laws::{apply_law, applicable_laws, polarity_flip, random_negative, LawError, LawKind};
use crate::lexicon::Lexicon;
use crate::logic::{equivalent, to_formula};
use crate::realizer::{parse_sentence, realize};
use crate::synth::{build_corpus, CorpusConfig, SynthError, SynthSentence};

/// Size of the synthetic probe set: one positive and one negative for each
/// of 656 sentences.
pub const PROBE_SENTENCES: usize = 656;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("bad ratio `{0}`: expected POS:NEG with both at least 1")]
    BadRatio(String),
    #[error("ratio unreachable for `{sentence}`: {source}")]
    RatioUnreachable { sentence: String, source: LawError },
    #[error("validation fraction must be in (0, 1), got {0}")]
    BadFraction(f64),
    #[error("oracle violation in pair {pair_id}: {detail}")]
    OracleViolation { pair_id: String, detail: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Positive:negative sample ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub pos: usize,
    pub neg: usize,
}

impl Ratio {
    pub const ONE_TO_ONE: Ratio = Ratio { pos: 1, neg: 1 };

    /// Negatives owed to the `i`-th positive so the running total stays at
    /// floor(i * neg / pos).
    fn negatives_for(&self, i: usize) -> usize {
        (i + 1) * self.neg / self.pos - i * self.neg / self.pos
    }
}

impl FromStr for Ratio {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DatasetError::BadRatio(s.to_string());
        let (p, n) = s.split_once(':').ok_or_else(bad)?;
        let pos: usize = p.trim().parse().map_err(|_| bad())?;
        let neg: usize = n.trim().parse().map_err(|_| bad())?;
        if pos == 0 || neg == 0 {
            return Err(bad());
        }
        Ok(Ratio { pos, neg })
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.pos, self.neg)
    }
}

/// Where the second sentence of a pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairLaw {
    Contraposition,
    Implication,
    Commutative,
    DoubleNegation,
    RandomSample,
}

impl PairLaw {
    pub fn name(self) -> &'static str {
        match self {
            PairLaw::Contraposition => "contraposition",
            PairLaw::Implication => "implication",
            PairLaw::Commutative => "commutative",
            PairLaw::DoubleNegation => "double-negation",
            PairLaw::RandomSample => "random-sample",
        }
    }
}

impl From<LawKind> for PairLaw {
    fn from(law: LawKind) -> Self {
        match law {
            LawKind::Contraposition => PairLaw::Contraposition,
            LawKind::Implication => PairLaw::Implication,
            LawKind::Commutative => PairLaw::Commutative,
            LawKind::DoubleNegation => PairLaw::DoubleNegation,
        }
    }
}

impl fmt::Display for PairLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub sentence1: String,
    pub sentence2: String,
    pub label: u8,
    pub law: PairLaw,
    pub pair_id: String,
}

impl PairRecord {
    pub fn new(sentence1: String, sentence2: String, label: u8, law: PairLaw) -> Self {
        let pair_id = pair_id(&sentence1, &sentence2, label, law);
        PairRecord {
            sentence1,
            sentence2,
            label,
            law,
            pair_id,
        }
    }
}

/// First 16 hex digits of SHA-256 over the record's content fields.
pub fn pair_id(sentence1: &str, sentence2: &str, label: u8, law: PairLaw) -> String {
    let mut h = Sha256::new();
    for part in [sentence1, sentence2, &label.to_string(), law.name()] {
        h.update(part.as_bytes());
        h.update([0x1f]);
    }
    hex::encode(h.finalize())[..16].to_string()
}

/// Re-parses both sentences and checks the label against the oracle.
pub fn verify_record(record: &PairRecord, lexicon: &Lexicon) -> Result<(), String> {
    if record.sentence1 == record.sentence2 {
        return Err("sentence1 equals sentence2".into());
    }
    let f1 = parse_sentence(&record.sentence1)
        .map_err(|e| e.to_string())
        .and_then(|g| to_formula(&g, lexicon).map_err(|e| e.to_string()))?;
    let f2 = parse_sentence(&record.sentence2)
        .map_err(|e| e.to_string())
        .and_then(|g| to_formula(&g, lexicon).map_err(|e| e.to_string()))?;
    let eq = equivalent(&f1, &f2).map_err(|e| e.to_string())?;
    match (record.label, eq) {
        (1, true) | (0, false) => Ok(()),
        (1, false) => Err("labelled equivalent but formulas differ".into()),
        (0, true) => Err("labelled nonequivalent but formulas agree".into()),
        (l, _) => Err(format!("label {l} out of range")),
    }
}

#[derive(Debug, Clone, Default)]
pub struct PairSet {
    pub records: Vec<PairRecord>,
    /// Corpus sentences with no applicable law.
    pub skipped: usize,
}

impl PairSet {
    pub fn positives(&self) -> usize {
        self.records.iter().filter(|r| r.label == 1).count()
    }

    pub fn negatives(&self) -> usize {
        self.records.iter().filter(|r| r.label == 0).count()
    }
}

fn gate(record: PairRecord, lexicon: &Lexicon) -> Result<PairRecord, DatasetError> {
    verify_record(&record, lexicon).map_err(|detail| DatasetError::OracleViolation {
        pair_id: record.pair_id.clone(),
        detail: format!("{detail} ({:?} / {:?})", record.sentence1, record.sentence2),
    })?;
    Ok(record)
}

fn law_for(sentence: &SynthSentence, lexicon: &Lexicon) -> Option<LawKind> {
    let laws = applicable_laws(&sentence.graph, lexicon);
    let preferred = sentence.pattern.law();
    if laws.contains(&preferred) {
        Some(preferred)
    } else {
        laws.into_iter().next()
    }
}

/// One law-based positive per sentence and negatives up to the ratio.
///
/// Negative order per sentence: the law's own negative, a random corpus
/// sample, a polarity flip, then further random samples.
pub fn build_pairs(
    corpus: &[SynthSentence],
    lexicon: &Lexicon,
    ratio: Ratio,
    seed: u64,
) -> Result<PairSet, DatasetError> {
    let graphs: Vec<AmrGraph> = corpus.iter().map(|s| s.graph.clone()).collect();
    let mut set = PairSet::default();
    let mut produced = 0usize;
    for (i, sentence) in corpus.iter().enumerate() {
        let Some(law) = law_for(sentence, lexicon) else {
            set.skipped += 1;
            continue;
        };
        let outcome = apply_law(law, &sentence.graph, lexicon)?;
        let text = &sentence.text;
        let positive_text = realize(&outcome.positive).expect("rewrite stays in grammar");
        set.records.push(gate(
            PairRecord::new(text.clone(), positive_text, 1, law.into()),
            lexicon,
        )?);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let want = ratio.negatives_for(produced);
        produced += 1;
        let mut structural: Vec<(AmrGraph, PairLaw)> = outcome
            .negatives
            .iter()
            .map(|g| (g.clone(), PairLaw::from(law)))
            .collect();
        if want >= 3 {
            if let Some(flip) = polarity_flip(&sentence.graph, lexicon, &mut rng)? {
                if !structural.iter().any(|(g, _)| *g == flip) {
                    structural.push((flip, PairLaw::from(law)));
                }
            }
        }
        let mut structural = structural.into_iter();
        let mut used: Vec<AmrGraph> = vec![outcome.positive.clone()];
        for j in 0..want {
            let pick = if j == 0 || j == 2 { structural.next() } else { None };
            let (graph, source) = match pick {
                Some(p) => p,
                None => {
                    let exclude: Vec<&AmrGraph> = used.iter().collect();
                    let g = random_negative(&sentence.graph, &graphs, &exclude, lexicon, &mut rng).map_err(|source| {
                        DatasetError::RatioUnreachable {
                            sentence: text.clone(),
                            source,
                        }
                    })?;
                    (g.clone(), PairLaw::RandomSample)
                }
            };
            let negative_text = realize(&graph).expect("negative stays in grammar");
            used.push(graph);
            set.records.push(gate(PairRecord::new(text.clone(), negative_text, 0, source), lexicon)?);
        }
    }
    Ok(set)
}

/// Stratified seeded split: each label class contributes round(n * f) records
/// to validation. Both sides keep input order.
pub fn split(records: &[PairRecord], val_fraction: f64, seed: u64) -> Result<(Vec<PairRecord>, Vec<PairRecord>), DatasetError> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(DatasetError::BadFraction(val_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_val = vec![false; records.len()];
    for label in [1u8, 0u8] {
        let mut idx: Vec<usize> = (0..records.len()).filter(|&i| records[i].label == label).collect();
        let n_val = (idx.len() as f64 * val_fraction).round() as usize;
        idx.shuffle(&mut rng);
        for &i in &idx[..n_val] {
            in_val[i] = true;
        }
    }
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (r, v) in records.iter().zip(in_val) {
        if v {
            val.push(r.clone());
        } else {
            train.push(r.clone());
        }
    }
    Ok((train, val))
}

pub fn to_jsonl(records: &[PairRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn emit_jsonl(records: &[PairRecord], path: &Path) -> Result<(), DatasetError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err(path))?);
    f.write_all(to_jsonl(records).as_bytes()).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))
}

fn check_invariants(r: &PairRecord) -> Result<(), String> {
    if r.label > 1 {
        return Err(format!("label {} is not 0 or 1", r.label));
    }
    if r.sentence1.trim().is_empty() || r.sentence2.trim().is_empty() {
        return Err("empty sentence".into());
    }
    if r.sentence1 == r.sentence2 {
        return Err("sentence1 equals sentence2".into());
    }
    if r.pair_id.is_empty() {
        return Err("empty pair_id".into());
    }
    Ok(())
}

pub fn parse_jsonl(text: &str) -> Result<Vec<PairRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: PairRecord = serde_json::from_str(line).map_err(|e| DatasetError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        check_invariants(&record).map_err(|message| DatasetError::Malformed { line: i + 1, message })?;
        out.push(record);
    }
    Ok(out)
}

/// Loads a JSONL dataset; with a lexicon, every record is replayed through
/// the oracle and the first violation is an error.
pub fn load_jsonl(path: &Path, verify: Option<&Lexicon>) -> Result<Vec<PairRecord>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let records = parse_jsonl(&text)?;
    if let Some(lex) = verify {
        for r in &records {
            verify_record(r, lex).map_err(|detail| DatasetError::OracleViolation {
                pair_id: r.pair_id.clone(),
                detail,
            })?;
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub total: usize,
    pub passed: usize,
    pub failures: Vec<CheckFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckFailure {
    pub line: usize,
    pub pair_id: String,
    pub reason: String,
}

/// Oracle replay that reports every failure instead of stopping at the first.
pub fn check_jsonl(path: &Path, lexicon: &Lexicon) -> Result<CheckReport, DatasetError> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut report = CheckReport::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        report.total += 1;
        let fail = |reason: String, pair_id: String| CheckFailure {
            line: i + 1,
            pair_id,
            reason,
        };
        match serde_json::from_str::<PairRecord>(&line) {
            Err(e) => report.failures.push(fail(e.to_string(), String::new())),
            Ok(r) => match check_invariants(&r).and_then(|_| verify_record(&r, lexicon)) {
                Ok(()) => report.passed += 1,
                Err(reason) => report.failures.push(fail(reason, r.pair_id.clone())),
            },
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawCounts {
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: String,
    pub seed: u64,
    pub ratio: String,
    pub val_fraction: f64,
    pub lexicon_checksum: String,
    pub positives: usize,
    pub negatives: usize,
    pub skipped_sentences: usize,
    pub per_law: BTreeMap<String, LawCounts>,
    pub train: usize,
    pub validation: usize,
    #[serde(default)]
    pub outputs: BTreeMap<String, String>,
}

impl DatasetManifest {
    pub fn new(set: &PairSet, train: &[PairRecord], val: &[PairRecord], ratio: Ratio, seed: u64, val_fraction: f64, lexicon: &Lexicon) -> Self {
        let mut per_law: BTreeMap<String, LawCounts> = BTreeMap::new();
        for r in &set.records {
            let c = per_law.entry(r.law.name().to_string()).or_default();
            if r.label == 1 {
                c.positive += 1;
            } else {
                c.negative += 1;
            }
        }
        DatasetManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            ratio: ratio.to_string(),
            val_fraction,
            lexicon_checksum: lexicon.checksum(),
            positives: set.positives(),
            negatives: set.negatives(),
            skipped_sentences: set.skipped,
            per_law,
            train: train.len(),
            validation: val.len(),
            outputs: BTreeMap::new(),
        }
    }
}

/// Seeded 1,312-pair probe set (656 sentences at 1:1).
pub fn probe_set(lexicon: &Lexicon, seed: u64) -> Result<Vec<PairRecord>, DatasetError> {
    let cfg = CorpusConfig {
        target: PROBE_SENTENCES,
        seed,
        ..CorpusConfig::default()
    };
    let corpus = build_corpus(lexicon, &cfg)?;
    Ok(build_pairs(&corpus, lexicon, Ratio::ONE_TO_ONE, seed)?.records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> Lexicon {
        Lexicon::default_lexicon()
    }

    fn small_corpus(n: usize) -> Vec<SynthSentence> {
        let cfg = CorpusConfig {
            target: n,
            seed: 5,
            ..CorpusConfig::default()
        };
        build_corpus(&lex(), &cfg).unwrap()
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!("1:3".parse::<Ratio>().unwrap(), Ratio { pos: 1, neg: 3 });
        for bad in ["1", "0:1", "1:0", "a:b", ""] {
            assert!(bad.parse::<Ratio>().is_err(), "{bad}");
        }
        let r = Ratio { pos: 2, neg: 3 };
        let total: usize = (0..10).map(|i| r.negatives_for(i)).sum();
        assert_eq!(total, 15);
    }

    #[test]
    fn exact_ratios() {
        let l = lex();
        let corpus = small_corpus(60);
        for k in 1..=3 {
            let set = build_pairs(&corpus, &l, Ratio { pos: 1, neg: k }, 2021).unwrap();
            assert_eq!(set.positives(), 60);
            assert_eq!(set.negatives(), 60 * k);
        }
    }

    #[test]
    fn table_row_one_published_strings() {
        let l = lex();
        let mut corpus = small_corpus(20);
        corpus.insert(0, SynthSentence::from_text("If Alan is kind, then Bob is clever.", &l).unwrap());
        let set = build_pairs(&corpus, &l, Ratio::ONE_TO_ONE, 1).unwrap();
        assert_eq!(set.records[0].sentence2, "If Bob is not clever, then Alan is not kind.");
        assert_eq!(set.records[1].sentence2, "If Bob is clever, then Alan is not kind.");
        assert_eq!(set.records[1].law, PairLaw::Contraposition);
    }

    #[test]
    fn non_augmentable_sentences_are_skipped() {
        let l = lex();
        let mut corpus = small_corpus(10);
        corpus.push(SynthSentence::from_text("Alan is not kind.", &l).unwrap());
        let set = build_pairs(&corpus, &l, Ratio::ONE_TO_ONE, 1).unwrap();
        assert_eq!(set.skipped, 1);
        assert_eq!(set.positives(), 10);
    }

    #[test]
    fn split_counts_and_determinism() {
        let l = lex();
        let set = build_pairs(&small_corpus(50), &l, Ratio::ONE_TO_ONE, 1).unwrap();
        let (train, val) = split(&set.records, 0.2, 4).unwrap();
        assert_eq!((train.len(), val.len()), (80, 20));
        let (train2, val2) = split(&set.records, 0.2, 4).unwrap();
        assert_eq!((train, val.clone()), (train2, val2));
        let pos = val.iter().filter(|r| r.label == 1).count();
        assert_eq!(pos, 10);
        assert!(split(&set.records, 1.0, 4).is_err());
        assert!(split(&set.records, 0.0, 4).is_err());
    }

    #[test]
    fn jsonl_round_trip_and_validation() {
        let l = lex();
        let set = build_pairs(&small_corpus(5), &l, Ratio::ONE_TO_ONE, 1).unwrap();
        let text = to_jsonl(&set.records);
        assert_eq!(parse_jsonl(&text).unwrap(), set.records);
        let bad = text.replacen("\"label\":1", "\"label\":2", 1);
        match parse_jsonl(&bad) {
            Err(DatasetError::Malformed { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_jsonl("{not json"), Err(DatasetError::Malformed { line: 1, .. })));
    }

    #[test]
    fn pair_ids_are_stable() {
        let a = pair_id("Alan is kind.", "Alan is not unkind.", 1, PairLaw::DoubleNegation);
        assert_eq!(a.len(), 16);
        assert_eq!(a, pair_id("Alan is kind.", "Alan is not unkind.", 1, PairLaw::DoubleNegation));
        assert_ne!(a, pair_id("Alan is kind.", "Alan is not unkind.", 0, PairLaw::DoubleNegation));
    }

    #[test]
    fn ratio_unreachable_on_tiny_corpus() {
        let l = lex();
        let corpus = vec![SynthSentence::from_text("The bald eagle is strong.", &l).unwrap()];
        let err = build_pairs(&corpus, &l, Ratio { pos: 1, neg: 2 }, 1).unwrap_err();
        assert!(matches!(err, DatasetError::RatioUnreachable { .. }));
    }
}
