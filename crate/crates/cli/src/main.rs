//! `amrlogic` command line: every subcommand writes its data to files, logs
//! to stderr, and leaves a `<output>.manifest.json` beside its main output.
//!
//! Exit codes: 0 success, 1 validation or oracle failure, 2 usage error.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amrlogic::amr::{parse_blocks, parse_penman, write_blocks};
use amrlogic::contrastive::{self, ScoreKind};
use amrlogic::dataset::{self, DatasetManifest, PairRecord, Ratio};
use amrlogic::grammar::Shape;
use amrlogic::laws::{apply_law, verify_outcome, LawKind};
use amrlogic::lexicon::{load_lexicon, read_antonym_pairs, read_word_list, Lexicon};
use amrlogic::prompt::{self, Format};
use amrlogic::synth::{self, CorpusConfig, CorpusRecord, Mix, PararuleRecord, SynthSentence};
use amrlogic::{parse_sentence, realize, sha256_hex, AmrGraph};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "amrlogic", version, about = "Logic-driven augmentation over AMR graphs")]
struct Cli {
    #[command(flatten)]
    lexicon: LexiconArgs,
    /// -v for info, -vv for debug logging.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct LexiconArgs {
    /// Lexicon TSV; defaults to $AMRLOGIC_LEXICON, then the built-in lexicon.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Replace the entity list (one per line).
    #[arg(long, global = true)]
    entities: Option<PathBuf>,
    /// Replace the attribute list (one per line).
    #[arg(long, global = true)]
    attributes: Option<PathBuf>,
    /// Replace the antonym map (two tab separated words per line).
    #[arg(long, global = true)]
    antonyms: Option<PathBuf>,
}

impl LexiconArgs {
    fn load(&self) -> Result<Lexicon> {
        let mut lex = match &self.lexicon {
            Some(p) => load_lexicon(p)?,
            None => Lexicon::from_env_or_default()?,
        };
        if let Some(p) = &self.entities {
            lex = lex.with_entities(read_word_list(p)?);
        }
        if let Some(p) = &self.attributes {
            lex = lex.with_attributes(read_word_list(p)?);
        }
        if let Some(p) = &self.antonyms {
            lex = lex.with_antonyms(&read_antonym_pairs(p)?)?;
        }
        Ok(lex)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic corpus as JSONL.
    Synth {
        #[arg(long, default_value_t = synth::DEFAULT_TARGET)]
        count: usize,
        /// e.g. `atomic=0.25,commutative=0.25,contraposition=0.25,implication=0.25`
        #[arg(long)]
        mix: Option<Mix>,
        #[arg(long, default_value_t = synth::DEFAULT_SEED)]
        seed: u64,
        /// Keep sentences that no law applies to.
        #[arg(long)]
        include_inert: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply one law to every input sentence or graph.
    Augment {
        #[arg(long)]
        law: LawKind,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also emit the law's label-0 variants.
        #[arg(long)]
        negatives: bool,
        #[arg(long, value_enum, default_value_t = InputKind::Text)]
        input_format: InputKind,
        /// Write the positive graphs as Penman blocks too.
        #[arg(long)]
        penman_out: Option<PathBuf>,
    },
    /// Build contrastive pairs and a train/validation split.
    Pairs {
        /// Corpus JSONL from `synth`; the default corpus is built when absent.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value = "1:1")]
        ratio: Ratio,
        #[arg(long, default_value_t = 0.2)]
        val_frac: f64,
        #[arg(long, default_value_t = synth::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out_train: PathBuf,
        #[arg(long)]
        out_val: PathBuf,
    },
    /// Replay a pair dataset through the oracle.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Append law rewrites to multiple-choice options.
    PromptAug {
        #[arg(long)]
        format: Format,
        #[arg(long, value_delimiter = ',', default_value = "contraposition,implication")]
        laws: Vec<LawKind>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sidecar JSONL with one trace per record.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Alter rules of PARARULE-Plus style records.
    Pararule {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        depth: u8,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Rule indices to alter; overrides per-record `altered_indices`.
        #[arg(long, value_delimiter = ',')]
        select: Option<Vec<usize>>,
    },
    /// Contrastive loss over supplied vectors.
    Loss {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long, default_value = "cosine")]
        score: ScoreKind,
        /// Report file; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded probe set of pairs.
    Probe {
        #[arg(long, default_value_t = synth::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sentences (one per line) to Penman blocks.
    Parse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Penman blocks to sentences.
    Realize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InputKind {
    Text,
    Penman,
}

#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    version: &'static str,
    seed: Option<u64>,
    lexicon_checksum: String,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    details: Value,
}

impl RunManifest {
    fn new(command: &'static str, seed: Option<u64>, lex: &Lexicon) -> Self {
        RunManifest {
            command,
            version: VERSION,
            seed,
            lexicon_checksum: lex.checksum(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            details: Value::Null,
        }
    }

    fn input(mut self, path: &Path) -> Result<Self> {
        self.inputs.insert(path.display().to_string(), file_checksum(path)?);
        Ok(self)
    }

    fn output(mut self, path: &Path) -> Result<Self> {
        self.outputs.insert(path.display().to_string(), file_checksum(path)?);
        Ok(self)
    }

    fn details(mut self, details: impl Serialize) -> Self {
        self.details = serde_json::to_value(details).expect("details serialize");
        self
    }

    fn write_beside(&self, out: &Path) -> Result<()> {
        write_json(&manifest_path(out), self)
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn file_checksum(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, body: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write(path, serde_json::to_string_pretty(value)? + "\n")
}

fn jsonl<T: Serialize>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| serde_json::to_string(i).expect("record serializes") + "\n")
        .collect()
}

fn non_empty_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn cmd_synth(lex: &Lexicon, count: usize, mix: Option<Mix>, seed: u64, include_inert: bool, out: &Path) -> Result<()> {
    let cfg = CorpusConfig {
        target: count,
        mix: mix.unwrap_or_default(),
        seed,
        augmentable_only: !include_inert,
    };
    let corpus = synth::build_corpus(lex, &cfg)?;
    let records: Vec<CorpusRecord> = corpus.iter().map(SynthSentence::to_record).collect();
    write(out, jsonl(&records))?;
    let mut per_pattern: BTreeMap<String, usize> = BTreeMap::new();
    for s in &corpus {
        *per_pattern.entry(s.pattern.name().to_string()).or_default() += 1;
    }
    log::info!("wrote {} sentences to {}", corpus.len(), out.display());
    RunManifest::new("synth", Some(seed), lex)
        .output(out)?
        .details(json!({
            "count": corpus.len(),
            "mix": cfg.mix.to_string(),
            "augmentable_only": cfg.augmentable_only,
            "per_pattern": per_pattern,
        }))
        .write_beside(out)
}

fn read_graphs(path: &Path, kind: InputKind) -> Result<(Vec<(String, AmrGraph)>, usize)> {
    let text = read(path)?;
    let mut out = Vec::new();
    let mut skipped = 0;
    match kind {
        InputKind::Text => {
            for (line, sentence) in non_empty_lines(&text) {
                match parse_sentence(sentence) {
                    Ok(g) => out.push((sentence.to_string(), g)),
                    Err(e) => {
                        log::warn!("line {line} skipped: {e}");
                        skipped += 1;
                    }
                }
            }
        }
        InputKind::Penman => {
            for block in parse_blocks(&text) {
                match block.map_err(|e| e.to_string()).and_then(|g| {
                    let s = realize(&g).map_err(|e| e.to_string())?;
                    Ok((s, g))
                }) {
                    Ok(pair) => out.push(pair),
                    Err(e) => {
                        log::warn!("skipped: {e}");
                        skipped += 1;
                    }
                }
            }
        }
    }
    Ok((out, skipped))
}

fn cmd_augment(
    lex: &Lexicon,
    law: LawKind,
    input: &Path,
    out: &Path,
    negatives: bool,
    kind: InputKind,
    penman_out: Option<&Path>,
) -> Result<()> {
    let (items, mut skipped) = read_graphs(input, kind)?;
    let mut records = Vec::new();
    let mut positives = Vec::new();
    for (text, graph) in &items {
        let outcome = match apply_law(law, graph, lex) {
            Ok(o) => o,
            Err(e) => {
                log::warn!("skipped `{text}`: {e}");
                skipped += 1;
                continue;
            }
        };
        if !verify_outcome(graph, &outcome, lex)? {
            bail!("oracle rejected the {law} rewrite of `{text}`");
        }
        records.push(PairRecord::new(text.clone(), realize(&outcome.positive)?, 1, law.into()));
        if negatives {
            for n in &outcome.negatives {
                records.push(PairRecord::new(text.clone(), realize(n)?, 0, law.into()));
            }
        }
        positives.push(outcome.positive);
    }
    write(out, dataset::to_jsonl(&records))?;
    let mut manifest = RunManifest::new("augment", None, lex).input(input)?.output(out)?;
    if let Some(p) = penman_out {
        write(p, write_blocks(&positives))?;
        manifest = manifest.output(p)?;
    }
    log::info!("{} rewritten, {skipped} skipped", positives.len());
    manifest
        .details(json!({
            "law": law,
            "negatives": negatives,
            "rewritten": positives.len(),
            "skipped": skipped,
            "records": records.len(),
        }))
        .write_beside(out)
}

fn load_corpus(path: &Path, lex: &Lexicon) -> Result<Vec<SynthSentence>> {
    let text = read(path)?;
    non_empty_lines(&text)
        .map(|(line, l)| {
            let rec: CorpusRecord = serde_json::from_str(l).with_context(|| format!("{}:{line}", path.display()))?;
            let graph = parse_penman(&rec.penman).with_context(|| format!("{}:{line}", path.display()))?;
            let shape = Shape::from_graph(&graph).with_context(|| format!("{}:{line}", path.display()))?;
            Ok(SynthSentence::from_shape(&shape, rec.pattern, lex))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_pairs(
    lex: &Lexicon,
    corpus_path: Option<&Path>,
    ratio: Ratio,
    val_frac: f64,
    seed: u64,
    out_train: &Path,
    out_val: &Path,
) -> Result<()> {
    let corpus = match corpus_path {
        Some(p) => load_corpus(p, lex)?,
        None => synth::build_corpus(
            lex,
            &CorpusConfig {
                seed,
                ..CorpusConfig::default()
            },
        )?,
    };
    let set = dataset::build_pairs(&corpus, lex, ratio, seed)?;
    let (train, val) = dataset::split(&set.records, val_frac, seed)?;
    dataset::emit_jsonl(&train, out_train)?;
    dataset::emit_jsonl(&val, out_val)?;
    let mut details = DatasetManifest::new(&set, &train, &val, ratio, seed, val_frac, lex);
    for p in [out_train, out_val] {
        details.outputs.insert(p.display().to_string(), file_checksum(p)?);
    }
    log::info!(
        "{} positives, {} negatives; {} train / {} validation",
        set.positives(),
        set.negatives(),
        train.len(),
        val.len()
    );
    let mut manifest = RunManifest::new("pairs", Some(seed), lex).output(out_train)?.output(out_val)?;
    if let Some(p) = corpus_path {
        manifest = manifest.input(p)?;
    }
    manifest.details(details).write_beside(out_train)
}

/// Ok(true) when every record passed.
fn cmd_check(lex: &Lexicon, input: &Path) -> Result<bool> {
    let report = dataset::check_jsonl(input, lex)?;
    if report.total == 0 {
        bail!("{} holds no records", input.display());
    }
    for f in &report.failures {
        log::error!("line {} ({}): {}", f.line, f.pair_id, f.reason);
    }
    println!(
        "checked {} records: {} passed, {} failed",
        report.total,
        report.passed,
        report.failures.len()
    );
    Ok(report.failures.is_empty())
}

fn cmd_prompt_aug(lex: &Lexicon, format: Format, laws: Vec<LawKind>, input: &Path, out: &Path, trace: Option<&Path>) -> Result<()> {
    let laws: BTreeSet<LawKind> = laws.into_iter().collect();
    let (summary, traces) = prompt::augment_file(input, out, format, lex, &laws)?;
    let mut manifest = RunManifest::new("prompt-aug", None, lex).input(input)?.output(out)?;
    if let Some(t) = trace {
        write(t, jsonl(&traces))?;
        manifest = manifest.output(t)?;
    }
    log::info!(
        "{} records, {} sentences, skip rate {:.3}",
        summary.records,
        summary.sentences,
        summary.skip_rate
    );
    manifest
        .details(json!({ "laws": laws, "summary": summary }))
        .write_beside(out)
}

fn cmd_pararule(lex: &Lexicon, depth: u8, input: &Path, out: &Path, select: Option<Vec<usize>>) -> Result<()> {
    let text = read(input)?;
    let mut records = Vec::new();
    let mut warnings = 0;
    for (line, l) in non_empty_lines(&text) {
        let mut rec: PararuleRecord =
            serde_json::from_str(l).with_context(|| format!("{}:{line}", input.display()))?;
        let selection = select.clone().or_else(|| rec.altered_indices.clone());
        let altered = synth::alter_pararule_rules(&rec.rules, depth, selection.as_deref())?;
        warnings += altered.warnings.len();
        let indices: Vec<usize> = (0..rec.rules.len())
            .filter(|&i| altered.rules[i] != rec.rules[i])
            .collect();
        rec.rules = altered.rules;
        rec.altered_indices = Some(indices);
        records.push(rec);
    }
    write(out, jsonl(&records))?;
    RunManifest::new("pararule", None, lex)
        .input(input)?
        .output(out)?
        .details(json!({ "depth": depth, "records": records.len(), "warnings": warnings }))
        .write_beside(out)
}

#[derive(Serialize)]
struct TripletLoss {
    pair_id: String,
    h_pos: f64,
    h_neg: f64,
    loss: f64,
}

#[derive(Serialize)]
struct LossOutput {
    score: ScoreKind,
    triplets: Vec<TripletLoss>,
    total: f64,
    mean: f64,
}

fn cmd_loss(vectors: &Path, score: ScoreKind, out: Option<&Path>) -> Result<()> {
    let rows = contrastive::read_vectors(vectors)?;
    let triplets: Vec<contrastive::Triplet> = rows.iter().map(|(_, t)| t.clone()).collect();
    let report = contrastive::contrastive_loss(&triplets, score)?;
    let mut per = Vec::with_capacity(rows.len());
    for ((id, t), loss) in rows.iter().zip(&report.per_triplet) {
        let (h_pos, h_neg) = t.scores(score)?;
        per.push(TripletLoss {
            pair_id: id.clone(),
            h_pos,
            h_neg,
            loss: *loss,
        });
    }
    let output = LossOutput {
        score,
        mean: report.total / per.len() as f64,
        total: report.total,
        triplets: per,
    };
    match out {
        Some(p) => {
            write_json(p, &output)?;
            let lex = Lexicon::default_lexicon();
            RunManifest::new("loss", None, &lex)
                .input(vectors)?
                .output(p)?
                .details(json!({ "score": score }))
                .write_beside(p)
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&output)?);
            Ok(())
        }
    }
}

fn cmd_probe(lex: &Lexicon, seed: u64, out: &Path) -> Result<()> {
    let records = dataset::probe_set(lex, seed)?;
    dataset::emit_jsonl(&records, out)?;
    RunManifest::new("probe", Some(seed), lex)
        .output(out)?
        .details(json!({ "records": records.len() }))
        .write_beside(out)
}

fn cmd_parse(lex: &Lexicon, input: &Path, out: &Path) -> Result<()> {
    let (items, skipped) = read_graphs(input, InputKind::Text)?;
    write(out, write_blocks(items.iter().map(|(_, g)| g)))?;
    RunManifest::new("parse", None, lex)
        .input(input)?
        .output(out)?
        .details(json!({ "graphs": items.len(), "skipped": skipped }))
        .write_beside(out)
}

fn cmd_realize(lex: &Lexicon, input: &Path, out: &Path) -> Result<()> {
    let (items, skipped) = read_graphs(input, InputKind::Penman)?;
    let body: String = items.iter().map(|(s, _)| format!("{s}\n")).collect();
    write(out, body)?;
    RunManifest::new("realize", None, lex)
        .input(input)?
        .output(out)?
        .details(json!({ "sentences": items.len(), "skipped": skipped }))
        .write_beside(out)
}

fn run(cli: Cli) -> Result<bool> {
    let lex = || cli.lexicon.load().context("loading lexicon");
    match cli.command {
        Command::Synth {
            count,
            mix,
            seed,
            include_inert,
            out,
        } => cmd_synth(&lex()?, count, mix, seed, include_inert, &out)?,
        Command::Augment {
            law,
            input,
            out,
            negatives,
            input_format,
            penman_out,
        } => cmd_augment(&lex()?, law, &input, &out, negatives, input_format, penman_out.as_deref())?,
        Command::Pairs {
            corpus,
            ratio,
            val_frac,
            seed,
            out_train,
            out_val,
        } => cmd_pairs(&lex()?, corpus.as_deref(), ratio, val_frac, seed, &out_train, &out_val)?,
        Command::Check { input } => return cmd_check(&lex()?, &input),
        Command::PromptAug {
            format,
            laws,
            input,
            out,
            trace,
        } => cmd_prompt_aug(&lex()?, format, laws, &input, &out, trace.as_deref())?,
        Command::Pararule {
            depth,
            input,
            out,
            select,
        } => cmd_pararule(&lex()?, depth, &input, &out, select)?,
        Command::Loss { vectors, score, out } => cmd_loss(&vectors, score, out.as_deref())?,
        Command::Probe { seed, out } => cmd_probe(&lex()?, seed, &out)?,
        Command::Parse { input, out } => cmd_parse(&lex()?, &input, &out)?,
        Command::Realize { input, out } => cmd_realize(&lex()?, &input, &out)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
