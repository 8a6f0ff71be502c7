//! Entity / relation / attribute lexicon and the adjective antonym map.
//!
//! The on-disk format is a small sectioned TSV file (columns tab separated):
//!
//! ```text
//! ENTITY  23
//! the bald eagle
//! ...
//! ANTONYM  2
//! strong  weak  attested
//! weak  strong  attested
//! ```
//!
//! Each header declares how many rows follow. Antonym rows must appear in
//! both directions.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Environment variable naming a lexicon file to use instead of the built-in one.
pub const LEXICON_ENV: &str = "AMRLOGIC_LEXICON";

const DEFAULT_TSV: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: unknown section header `{name}`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: row outside of any section")]
    NoSection { line: usize },
    #[error("line {line}: bad header count `{count}`")]
    BadCount { line: usize, count: String },
    #[error("section {section}: declared {declared} rows, found {found}")]
    CountMismatch {
        section: String,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: duplicate {section} entry `{entry}`")]
    Duplicate {
        line: usize,
        section: String,
        entry: String,
    },
    #[error("line {line}: malformed antonym row")]
    BadAntonymRow { line: usize },
    #[error("antonym `{word}` -> `{antonym}` has no reverse row")]
    Asymmetric { word: String, antonym: String },
    #[error("`{0}` is its own antonym")]
    Reflexive(String),
    #[error("antonym row `{word}` -> `{antonym}` uses a word that is not an attribute; flag it `external`")]
    UnknownAntonymWord { word: String, antonym: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Entity,
    Relation,
    Attribute,
    Antonym,
    EntityExt,
    AttributeExt,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "ENTITY" => Section::Entity,
            "RELATION" => Section::Relation,
            "ATTRIBUTE" => Section::Attribute,
            "ANTONYM" => Section::Antonym,
            "ENTITY_EXT" => Section::EntityExt,
            "ATTRIBUTE_EXT" => Section::AttributeExt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Section::Entity => "ENTITY",
            Section::Relation => "RELATION",
            Section::Attribute => "ATTRIBUTE",
            Section::Antonym => "ANTONYM",
            Section::EntityExt => "ENTITY_EXT",
            Section::AttributeExt => "ATTRIBUTE_EXT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntonymEntry {
    pub antonym: String,
    pub provenance: String,
    pub external: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    entities: Vec<String>,
    relations: Vec<String>,
    attributes: Vec<String>,
    antonyms: BTreeMap<String, AntonymEntry>,
    entity_ext: Vec<String>,
    attribute_ext: Vec<String>,
}

impl Lexicon {
    /// The built-in lexicon, reproducing the synthetic-corpus word lists.
    pub fn default_lexicon() -> Self {
        Self::from_tsv(DEFAULT_TSV).expect("built-in lexicon is valid")
    }

    /// Built-in lexicon unless [`LEXICON_ENV`] names a file.
    pub fn from_env_or_default() -> Result<Self, LexiconError> {
        match std::env::var_os(LEXICON_ENV) {
            Some(path) => load_lexicon(Path::new(&path)),
            None => Ok(Self::default_lexicon()),
        }
    }

    pub fn from_tsv(text: &str) -> Result<Self, LexiconError> {
        let mut rows: BTreeMap<Section, Vec<(usize, Vec<String>)>> = BTreeMap::new();
        let mut declared: Vec<(Section, usize)> = Vec::new();
        let mut current: Option<Section> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            let is_header = cols[0].chars().all(|c| c.is_ascii_uppercase() || c == '_');
            if is_header {
                let section = Section::parse(cols[0]).ok_or_else(|| LexiconError::UnknownSection {
                    line,
                    name: cols[0].to_string(),
                })?;
                let count = cols.get(1).copied().unwrap_or("");
                let n = count.parse::<usize>().map_err(|_| LexiconError::BadCount {
                    line,
                    count: count.to_string(),
                })?;
                declared.push((section, n));
                rows.entry(section).or_default();
                current = Some(section);
                continue;
            }
            let section = current.ok_or(LexiconError::NoSection { line })?;
            rows.entry(section)
                .or_default()
                .push((line, cols.iter().map(|s| s.to_string()).collect()));
        }
        for (section, n) in &declared {
            let found = rows.get(section).map_or(0, Vec::len);
            if found != *n {
                return Err(LexiconError::CountMismatch {
                    section: section.name().to_string(),
                    declared: *n,
                    found,
                });
            }
        }

        let list = |section: Section| -> Result<Vec<String>, LexiconError> {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for (line, cols) in rows.get(&section).map(Vec::as_slice).unwrap_or_default() {
                let entry = cols[0].clone();
                if !seen.insert(entry.clone()) {
                    return Err(LexiconError::Duplicate {
                        line: *line,
                        section: section.name().to_string(),
                        entry,
                    });
                }
                out.push(entry);
            }
            Ok(out)
        };
        let entities = list(Section::Entity)?;
        let relations = list(Section::Relation)?;
        let attributes = list(Section::Attribute)?;
        let entity_ext = list(Section::EntityExt)?;
        let attribute_ext = list(Section::AttributeExt)?;
        for (ext, base, section) in [
            (&entity_ext, &entities, Section::EntityExt),
            (&attribute_ext, &attributes, Section::AttributeExt),
        ] {
            if let Some(dup) = ext.iter().find(|e| base.contains(e)) {
                return Err(LexiconError::Duplicate {
                    line: 0,
                    section: section.name().to_string(),
                    entry: dup.clone(),
                });
            }
        }

        let known: HashSet<&str> = attributes
            .iter()
            .chain(&attribute_ext)
            .map(String::as_str)
            .collect();
        let mut antonyms = BTreeMap::new();
        for (line, cols) in rows.get(&Section::Antonym).map(Vec::as_slice).unwrap_or_default() {
            if cols.len() < 2 || cols.len() > 4 || cols[0].is_empty() || cols[1].is_empty() {
                return Err(LexiconError::BadAntonymRow { line: *line });
            }
            let external = match cols.get(3).map(String::as_str) {
                None => false,
                Some("external") => true,
                Some(_) => return Err(LexiconError::BadAntonymRow { line: *line }),
            };
            let (word, antonym) = (cols[0].clone(), cols[1].clone());
            if word == antonym {
                return Err(LexiconError::Reflexive(word));
            }
            if !external && !(known.contains(word.as_str()) && known.contains(antonym.as_str())) {
                return Err(LexiconError::UnknownAntonymWord { word, antonym });
            }
            let entry = AntonymEntry {
                antonym,
                provenance: cols.get(2).cloned().unwrap_or_else(|| "curated".to_string()),
                external,
            };
            if antonyms.insert(word.clone(), entry).is_some() {
                return Err(LexiconError::Duplicate {
                    line: *line,
                    section: Section::Antonym.name().to_string(),
                    entry: word,
                });
            }
        }
        for (word, entry) in &antonyms {
            match antonyms.get(&entry.antonym) {
                Some(back) if &back.antonym == word => {}
                _ => {
                    return Err(LexiconError::Asymmetric {
                        word: word.clone(),
                        antonym: entry.antonym.clone(),
                    })
                }
            }
        }

        Ok(Lexicon {
            entities,
            relations,
            attributes,
            antonyms,
            entity_ext,
            attribute_ext,
        })
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn entity_extensions(&self) -> &[String] {
        &self.entity_ext
    }

    pub fn attribute_extensions(&self) -> &[String] {
        &self.attribute_ext
    }

    pub fn antonym_entries(&self) -> impl Iterator<Item = (&str, &AntonymEntry)> {
        self.antonyms.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Words in the antonym map that are not listed attributes.
    pub fn external_words(&self) -> BTreeSet<&str> {
        let known: HashSet<&str> = self
            .attributes
            .iter()
            .chain(&self.attribute_ext)
            .map(String::as_str)
            .collect();
        self.antonyms
            .keys()
            .map(String::as_str)
            .filter(|w| !known.contains(w))
            .collect()
    }

    pub fn antonym_of(&self, adjective: &str) -> Option<&str> {
        self.antonyms.get(adjective).map(|e| e.antonym.as_str())
    }

    /// Canonical side of an antonym pair: the lexicographically smaller word.
    /// Returns the base word and whether `adjective` is its negation.
    pub fn normalize_attribute<'a>(&'a self, adjective: &'a str) -> (&'a str, bool) {
        match self.antonym_of(adjective) {
            Some(ant) if ant < adjective => (ant, true),
            _ => (adjective, false),
        }
    }

    pub fn with_entities(mut self, entities: Vec<String>) -> Self {
        self.entities = entities;
        self
    }

    pub fn with_attributes(mut self, attributes: Vec<String>) -> Self {
        self.attributes = attributes;
        self
    }

    /// Replaces the antonym map; `pairs` must already be symmetric.
    pub fn with_antonyms(self, pairs: &[(String, String)]) -> Result<Self, LexiconError> {
        let mut lex = self;
        lex.antonyms = pairs
            .iter()
            .map(|(a, b)| {
                (
                    a.clone(),
                    AntonymEntry {
                        antonym: b.clone(),
                        provenance: "curated".into(),
                        external: true,
                    },
                )
            })
            .collect();
        // Round-trip through the text format to reuse validation.
        Lexicon::from_tsv(&lex.to_tsv())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let mut section = |name: &str, items: &[String]| {
            let _ = writeln!(out, "{name}\t{}", items.len());
            for it in items {
                let _ = writeln!(out, "{it}");
            }
        };
        section("ENTITY", &self.entities);
        section("RELATION", &self.relations);
        section("ATTRIBUTE", &self.attributes);
        let _ = writeln!(out, "ANTONYM\t{}", self.antonyms.len());
        for (w, e) in &self.antonyms {
            let _ = write!(out, "{w}\t{}\t{}", e.antonym, e.provenance);
            if e.external {
                out.push_str("\texternal");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "ENTITY_EXT\t{}", self.entity_ext.len());
        for it in &self.entity_ext {
            let _ = writeln!(out, "{it}");
        }
        let _ = writeln!(out, "ATTRIBUTE_EXT\t{}", self.attribute_ext.len());
        for it in &self.attribute_ext {
            let _ = writeln!(out, "{it}");
        }
        out
    }

    /// SHA-256 over the canonical TSV form.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.to_tsv().as_bytes()))
    }
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon, LexiconError> {
    let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Lexicon::from_tsv(&text)
}

/// Reads a one-entry-per-line list file (blank lines and `#` comments skipped).
pub fn read_word_list(path: &Path) -> Result<Vec<String>, LexiconError> {
    let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// Reads `word<TAB>antonym` rows; each pair is added in both directions.
pub fn read_antonym_pairs(path: &Path) -> Result<Vec<(String, String)>, LexiconError> {
    let mut set = BTreeMap::new();
    for (i, line) in read_word_list(path)?.iter().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 {
            return Err(LexiconError::BadAntonymRow { line: i + 1 });
        }
        set.insert(cols[0].to_string(), cols[1].to_string());
        set.insert(cols[1].to_string(), cols[0].to_string());
    }
    Ok(set.into_iter().collect())
}
