//! Synthetic sentence corpus over the lexicon and PARARULE-Plus rule
//! alteration templates.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amr::AmrGraph;
use crate::grammar::{Clause, Shape, Subject};
use crate::laws::{applicable_laws, LawKind};
use crate::lexicon::Lexicon;
use crate::logic::clause_formula;
use crate::realizer::{parse_shape, RealizerError};

pub const DEFAULT_TARGET: usize = 14_962;
pub const DEFAULT_SEED: u64 = 2021;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    AtomicDn,
    CommutativePair,
    ConditionalContra,
    ImplicationPair,
}

impl PatternKind {
    pub const ALL: [PatternKind; 4] = [
        PatternKind::AtomicDn,
        PatternKind::CommutativePair,
        PatternKind::ConditionalContra,
        PatternKind::ImplicationPair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternKind::AtomicDn => "atomic-dn",
            PatternKind::CommutativePair => "commutative-pair",
            PatternKind::ConditionalContra => "conditional-contra",
            PatternKind::ImplicationPair => "implication-pair",
        }
    }

    /// Number of polarity/direction variants per tuple.
    pub fn variants(self) -> usize {
        match self {
            PatternKind::AtomicDn => 1,
            PatternKind::CommutativePair | PatternKind::ConditionalContra => 4,
            PatternKind::ImplicationPair => 2,
        }
    }

    /// The law this family is built to exercise.
    pub fn law(self) -> LawKind {
        match self {
            PatternKind::AtomicDn => LawKind::DoubleNegation,
            PatternKind::CommutativePair => LawKind::Commutative,
            PatternKind::ConditionalContra => LawKind::Contraposition,
            PatternKind::ImplicationPair => LawKind::Implication,
        }
    }

    /// Family a free-standing shape most naturally belongs to.
    pub fn of_shape(shape: &Shape) -> PatternKind {
        match shape {
            Shape::Atomic(_) => PatternKind::AtomicDn,
            Shape::And(..) => PatternKind::CommutativePair,
            Shape::IfThen { .. } => PatternKind::ConditionalContra,
            Shape::Or(..) => PatternKind::ImplicationPair,
        }
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternKind {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "atomic-dn" | "atomicdn" | "atomic" | "double-negation" => PatternKind::AtomicDn,
            "commutative-pair" | "commutative" => PatternKind::CommutativePair,
            "conditional-contra" | "contraposition" | "conditional" => PatternKind::ConditionalContra,
            "implication-pair" | "implication" => PatternKind::ImplicationPair,
            _ => return Err(SynthError::BadMix(format!("unknown pattern `{s}`"))),
        })
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("requested {requested} sentences but only {available} distinct combinations exist")]
    CountExceedsPool { requested: usize, available: usize },
    #[error("target {target} unreachable: the mix admits at most {available} sentences")]
    Unreachable { target: usize, available: usize },
    #[error("bad mix: {0}")]
    BadMix(String),
    #[error("entity `{0}` is not a valid subject")]
    BadEntity(String),
    #[error("depth must be 1 or 2, got {0}")]
    BadDepth(u8),
    #[error(transparent)]
    Realizer(#[from] RealizerError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSentence {
    pub text: String,
    pub graph: AmrGraph,
    pub pattern: PatternKind,
    /// Per clause: (subject, normalized attribute, literal is negated).
    pub atoms: Vec<(String, String, bool)>,
}

impl SynthSentence {
    pub fn from_shape(shape: &Shape, pattern: PatternKind, lexicon: &Lexicon) -> Self {
        let atoms = shape
            .clauses()
            .into_iter()
            .map(|c| literal(c, lexicon))
            .collect();
        SynthSentence {
            text: shape.realize(),
            graph: shape.to_graph(),
            pattern,
            atoms,
        }
    }

    /// Builds a sentence from free text, inferring the family from its shape.
    pub fn from_text(text: &str, lexicon: &Lexicon) -> Result<Self, RealizerError> {
        let shape = parse_shape(text)?;
        Ok(SynthSentence::from_shape(&shape, PatternKind::of_shape(&shape), lexicon))
    }

    pub fn to_record(&self) -> CorpusRecord {
        CorpusRecord {
            text: self.text.clone(),
            penman: self.graph.serialize(),
            pattern: self.pattern,
        }
    }
}

fn literal(clause: &Clause, lexicon: &Lexicon) -> (String, String, bool) {
    match clause_formula(clause, lexicon) {
        crate::logic::Formula::Atom(a) => (a.subject, a.attribute, false),
        crate::logic::Formula::Not(inner) => match *inner {
            crate::logic::Formula::Atom(a) => (a.subject, a.attribute, true),
            _ => unreachable!("clause literal"),
        },
        _ => unreachable!("clause literal"),
    }
}

/// JSONL line of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub text: String,
    pub penman: String,
    pub pattern: PatternKind,
}

fn subjects(lexicon: &Lexicon) -> Result<Vec<Subject>, SynthError> {
    lexicon
        .entities()
        .iter()
        .map(|e| Subject::parse(e).ok_or_else(|| SynthError::BadEntity(e.clone())))
        .collect()
}

fn relation_negated(relation: &str) -> bool {
    relation.split_whitespace().any(|w| w == "not")
}

/// Every entity x relation x attribute sentence, in lexicon order.
pub fn generate_atomic(lexicon: &Lexicon) -> Result<Vec<SynthSentence>, SynthError> {
    let pool = Pool::new(lexicon, PatternKind::AtomicDn, false)?;
    Ok((0..pool.size()).map(|i| pool.sentence(i)).collect())
}

/// Index space of one pattern family.
struct Pool<'a> {
    lexicon: &'a Lexicon,
    pattern: PatternKind,
    subjects: Vec<Subject>,
    /// Atomic family restricted to sentences with an applicable law.
    atomic_keep: Option<Vec<usize>>,
}

impl<'a> Pool<'a> {
    fn new(lexicon: &'a Lexicon, pattern: PatternKind, augmentable_only: bool) -> Result<Self, SynthError> {
        let mut pool = Pool {
            lexicon,
            pattern,
            subjects: subjects(lexicon)?,
            atomic_keep: None,
        };
        if augmentable_only && pattern == PatternKind::AtomicDn {
            let keep = (0..pool.raw_size())
                .filter(|&i| !applicable_laws(&pool.shape(i).to_graph(), lexicon).is_empty())
                .collect();
            pool.atomic_keep = Some(keep);
        }
        Ok(pool)
    }

    fn raw_size(&self) -> usize {
        let e = self.subjects.len();
        let a = self.lexicon.attributes().len();
        match self.pattern {
            PatternKind::AtomicDn => e * self.lexicon.relations().len() * a,
            p => p.variants() * e * a * e.saturating_sub(1) * a,
        }
    }

    fn size(&self) -> usize {
        match &self.atomic_keep {
            Some(k) => k.len(),
            None => self.raw_size(),
        }
    }

    /// Shape at a pool index; index order is (sub1, adj1, sub2, adj2, variant).
    fn shape(&self, i: usize) -> Shape {
        let attrs = self.lexicon.attributes();
        let a = attrs.len();
        if self.pattern == PatternKind::AtomicDn {
            let i = self.atomic_keep.as_ref().map_or(i, |k| k[i]);
            let rels = self.lexicon.relations();
            let attr = &attrs[i % a];
            let rel = &rels[(i / a) % rels.len()];
            let subj = self.subjects[i / a / rels.len()].clone();
            return Shape::Atomic(Clause::adjective(subj, attr, relation_negated(rel)));
        }
        let e = self.subjects.len();
        let v = self.pattern.variants();
        let mut rest = i;
        let variant = rest % v;
        rest /= v;
        let adj2 = rest % a;
        rest /= a;
        let mut sub2 = rest % (e - 1);
        rest /= e - 1;
        let adj1 = rest % a;
        let sub1 = rest / a;
        if sub2 >= sub1 {
            sub2 += 1;
        }
        let s1 = self.subjects[sub1].clone();
        let s2 = self.subjects[sub2].clone();
        let (neg1, neg2) = (variant >= 2, variant % 2 == 1);
        match self.pattern {
            PatternKind::CommutativePair => Shape::And(
                Clause::adjective(s1, &attrs[adj1], neg1),
                Clause::adjective(s2, &attrs[adj2], neg2),
            ),
            PatternKind::ConditionalContra => Shape::IfThen {
                antecedent: Clause::adjective(s1, &attrs[adj1], neg1),
                consequent: Clause::adjective(s2, &attrs[adj2], neg2),
            },
            PatternKind::ImplicationPair if variant == 0 => Shape::IfThen {
                antecedent: Clause::adjective(s1, &attrs[adj1], false),
                consequent: Clause::adjective(s2, &attrs[adj2], false),
            },
            PatternKind::ImplicationPair => Shape::Or(
                Clause::adjective(s1, &attrs[adj1], true),
                Clause::adjective(s2, &attrs[adj2], false),
            ),
            PatternKind::AtomicDn => unreachable!(),
        }
    }

    fn sentence(&self, i: usize) -> SynthSentence {
        SynthSentence::from_shape(&self.shape(i), self.pattern, self.lexicon)
    }

    /// Seeded sample without replacement, returned in pool-index order and
    /// skipping texts already in `seen`.
    fn sample(
        &self,
        count: usize,
        rng: &mut ChaCha8Rng,
        seen: &mut HashSet<String>,
    ) -> Result<Vec<SynthSentence>, SynthError> {
        let size = self.size();
        if count > size {
            return Err(SynthError::CountExceedsPool {
                requested: count,
                available: size,
            });
        }
        let mut picked = index::sample(rng, size, count).into_vec();
        picked.sort_unstable();
        let mut used: HashSet<usize> = picked.iter().copied().collect();
        let mut out = Vec::with_capacity(count);
        for i in picked {
            let s = self.sentence(i);
            if seen.insert(s.text.to_lowercase()) {
                out.push(s);
            }
        }
        // Top up after duplicate texts; never taken with a valid lexicon.
        while out.len() < count && used.len() < size {
            let i = rng.gen_range(0..size);
            if !used.insert(i) {
                continue;
            }
            let s = self.sentence(i);
            if seen.insert(s.text.to_lowercase()) {
                out.push(s);
            }
        }
        if out.len() < count {
            return Err(SynthError::CountExceedsPool {
                requested: count,
                available: out.len(),
            });
        }
        Ok(out)
    }
}

fn family_rng(seed: u64, pattern: PatternKind) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pattern.stream());
    rng
}

/// Seeded sample of `count` distinct instantiations of one pattern family.
pub fn generate_pattern(
    lexicon: &Lexicon,
    pattern: PatternKind,
    count: usize,
    seed: u64,
) -> Result<Vec<SynthSentence>, SynthError> {
    let pool = Pool::new(lexicon, pattern, false)?;
    pool.sample(count, &mut family_rng(seed, pattern), &mut HashSet::new())
}

/// Fractions of the corpus per pattern family.
#[derive(Debug, Clone, PartialEq)]
pub struct Mix(BTreeMap<PatternKind, f64>);

impl Mix {
    pub fn new(parts: impl IntoIterator<Item = (PatternKind, f64)>) -> Result<Self, SynthError> {
        let mut map = BTreeMap::new();
        for (k, v) in parts {
            if !v.is_finite() || v < 0.0 {
                return Err(SynthError::BadMix(format!("fraction for {k} must be non-negative")));
            }
            *map.entry(k).or_insert(0.0) += v;
        }
        let sum: f64 = map.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SynthError::BadMix(format!("fractions sum to {sum}, not 1")));
        }
        Ok(Mix(map))
    }

    pub fn only(pattern: PatternKind) -> Self {
        Mix(BTreeMap::from([(pattern, 1.0)]))
    }

    pub fn fraction(&self, pattern: PatternKind) -> f64 {
        self.0.get(&pattern).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PatternKind, f64)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }
}

impl Default for Mix {
    fn default() -> Self {
        Mix(PatternKind::ALL.iter().map(|&p| (p, 0.25)).collect())
    }
}

impl FromStr for Mix {
    type Err = SynthError;

    /// `atomic=0.25,commutative=0.25,contraposition=0.25,implication=0.25`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = Vec::new();
        for item in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| SynthError::BadMix(format!("expected NAME=FRACTION, got `{item}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| SynthError::BadMix(format!("bad fraction `{v}`")))?;
            parts.push((k.parse()?, v));
        }
        Mix::new(parts)
    }
}

impl fmt::Display for Mix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Largest-remainder split of `total` over `weights`.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let raw: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut left = total - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

/// Per-family sentence counts for a target, capping families whose pool is
/// too small and spreading the excess over the rest by their fractions.
pub fn allocate_quotas(target: usize, mix: &Mix, capacity: &[(PatternKind, usize)]) -> Result<Vec<(PatternKind, usize)>, SynthError> {
    let kinds: Vec<PatternKind> = capacity.iter().map(|c| c.0).collect();
    let caps: Vec<usize> = capacity.iter().map(|c| c.1).collect();
    let weights: Vec<f64> = kinds.iter().map(|&k| mix.fraction(k)).collect();
    let available: usize = caps.iter().zip(&weights).filter(|(_, w)| **w > 0.0).map(|(c, _)| *c).sum();
    if target > available {
        return Err(SynthError::Unreachable { target, available });
    }
    let mut quota = vec![0usize; kinds.len()];
    let mut open: Vec<bool> = weights.iter().map(|w| *w > 0.0).collect();
    loop {
        let fixed: usize = (0..kinds.len()).filter(|&i| !open[i]).map(|i| quota[i]).sum();
        let w: Vec<f64> = weights.iter().zip(&open).map(|(w, o)| if *o { *w } else { 0.0 }).collect();
        let share = apportion(target - fixed, &w);
        let over: Vec<usize> = (0..kinds.len()).filter(|&i| open[i] && share[i] > caps[i]).collect();
        if over.is_empty() {
            for i in 0..kinds.len() {
                if open[i] {
                    quota[i] = share[i];
                }
            }
            break;
        }
        for i in over {
            quota[i] = caps[i];
            open[i] = false;
        }
    }
    Ok(kinds.into_iter().zip(quota).collect())
}

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub target: usize,
    pub mix: Mix,
    pub seed: u64,
    /// Keep only sentences with at least one applicable law.
    pub augmentable_only: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            target: DEFAULT_TARGET,
            mix: Mix::default(),
            seed: DEFAULT_SEED,
            augmentable_only: true,
        }
    }
}

/// Deduplicated corpus of exactly `config.target` sentences, families in
/// fixed order.
pub fn build_corpus(lexicon: &Lexicon, config: &CorpusConfig) -> Result<Vec<SynthSentence>, SynthError> {
    let pools: Vec<Pool> = PatternKind::ALL
        .iter()
        .map(|&p| Pool::new(lexicon, p, config.augmentable_only))
        .collect::<Result<_, _>>()?;
    let capacity: Vec<(PatternKind, usize)> = pools.iter().map(|p| (p.pattern, p.size())).collect();
    let quotas = allocate_quotas(config.target, &config.mix, &capacity)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(config.target);
    for (pool, (_, quota)) in pools.iter().zip(quotas) {
        log::debug!("{}: {quota} sentences from a pool of {}", pool.pattern, pool.size());
        let mut rng = family_rng(config.seed, pool.pattern);
        out.extend(pool.sample(quota, &mut rng, &mut seen)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleWarning {
    pub index: usize,
    pub rule: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlteredRules {
    pub rules: Vec<String>,
    pub warnings: Vec<RuleWarning>,
}

enum RuleTemplate<'a> {
    Conditional { body: Vec<&'a str>, head: &'a str },
    All { class: &'a str, property: &'a str },
    Generic { class: &'a str, property: &'a str },
}

fn match_rule(rule: &str) -> Option<RuleTemplate<'_>> {
    let words: Vec<&str> = rule.trim().trim_end_matches('.').split_whitespace().collect();
    let lower: Vec<String> = words.iter().map(|w| w.to_ascii_lowercase()).collect();
    let l: Vec<&str> = lower.iter().map(String::as_str).collect();
    match l.as_slice() {
        ["if", "someone", "is", .., "then", "they", "are", _] => {
            let body = words[3..words.len() - 4].to_vec();
            match body.as_slice() {
                [_] => Some(RuleTemplate::Conditional { body, head: words[words.len() - 1] }),
                [_, and, _] if and.eq_ignore_ascii_case("and") => Some(RuleTemplate::Conditional {
                    body: vec![body[0], body[2]],
                    head: words[words.len() - 1],
                }),
                _ => None,
            }
        }
        ["all", _, "people", "are", _] => Some(RuleTemplate::All {
            class: words[1],
            property: words[4],
        }),
        [_, "people", "are", _] => Some(RuleTemplate::Generic {
            class: words[0],
            property: words[3],
        }),
        _ => None,
    }
}

fn alter_rule(rule: &str, depth: u8) -> Option<String> {
    let lc = |w: &str| w.to_lowercase();
    let out = match match_rule(rule)? {
        RuleTemplate::Conditional { body, head } => match body.as_slice() {
            [x] => format!("If someone is not {head} then they are not {x}."),
            [x, y] if depth == 1 => format!("If someone is {y} and {x} then they are {head}."),
            [x, y] => format!("If someone is not {head} then they are not both {x} and {y}."),
            _ => return None,
        },
        RuleTemplate::All { class, property } => format!("There are no {} people who are not {property}.", lc(class)),
        RuleTemplate::Generic { class, property } => format!("If someone is not {property} then they are not {}.", lc(class)),
    };
    Some(out)
}

/// Rewrites the selected rules (all when `selection` is `None`) into
/// logically equivalent forms. Unmatched rules pass through with a warning.
pub fn alter_pararule_rules(rules: &[String], depth: u8, selection: Option<&[usize]>) -> Result<AlteredRules, SynthError> {
    if !(1..=2).contains(&depth) {
        return Err(SynthError::BadDepth(depth));
    }
    let mut out = AlteredRules::default();
    for (i, rule) in rules.iter().enumerate() {
        if selection.is_some_and(|s| !s.contains(&i)) {
            out.rules.push(rule.clone());
            continue;
        }
        match alter_rule(rule, depth) {
            Some(r) => out.rules.push(r),
            None => {
                log::warn!("rule {i} matches no template: {rule}");
                out.warnings.push(RuleWarning {
                    index: i,
                    rule: rule.clone(),
                    reason: "no matching rule template".into(),
                });
                out.rules.push(rule.clone());
            }
        }
    }
    Ok(out)
}

/// One PARARULE-Plus JSONL record; unknown fields are carried through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PararuleRecord {
    #[serde(default)]
    pub context: String,
    pub rules: Vec<String>,
    #[serde(default)]
    pub questions: Vec<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altered_indices: Option<Vec<usize>>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}
