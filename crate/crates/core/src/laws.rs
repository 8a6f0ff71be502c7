//! The four equivalence rewrites over AMR graphs and negative-sample
//! construction.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::amr::{split_sense, AmrGraph, Edge, Node, Target};
use crate::grammar::{Predicate, Shape};
use crate::lexicon::Lexicon;
use crate::logic::{equivalent, to_formula, LogicError};

/// Resampling attempts for a random corpus negative.
pub const MAX_SAMPLE_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    Contraposition,
    Implication,
    Commutative,
    DoubleNegation,
}

impl LawKind {
    pub const ALL: [LawKind; 4] = [
        LawKind::Contraposition,
        LawKind::Implication,
        LawKind::Commutative,
        LawKind::DoubleNegation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LawKind::Contraposition => "contraposition",
            LawKind::Implication => "implication",
            LawKind::Commutative => "commutative",
            LawKind::DoubleNegation => "double-negation",
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown law `{0}`")]
pub struct UnknownLaw(pub String);

impl FromStr for LawKind {
    type Err = UnknownLaw;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "contraposition" | "con" => Ok(LawKind::Contraposition),
            "implication" | "imp" => Ok(LawKind::Implication),
            "commutative" | "com" => Ok(LawKind::Commutative),
            "double-negation" | "doublenegation" | "dou" => Ok(LawKind::DoubleNegation),
            _ => Err(UnknownLaw(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteOutcome {
    pub positive: AmrGraph,
    pub negatives: Vec<AmrGraph>,
    pub law: LawKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LawError {
    #[error("{law} does not apply: {reason}")]
    NotApplicable { law: LawKind, reason: &'static str },
    #[error("no antonym for `{0}`")]
    NoAntonym(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("no nonequivalent corpus sample after {0} attempts")]
    CorpusExhausted(usize),
    #[error("corpus is empty")]
    EmptyCorpus,
}

fn finish(root: Node) -> AmrGraph {
    AmrGraph::from_root_unchecked(root).with_canonical_variables()
}

/// Returns the referent of an operand edge as an owned node.
fn operand_node(graph: &AmrGraph, edge: &Edge) -> Option<Node> {
    match &edge.target {
        Target::Node(n) => Some(n.clone()),
        Target::Ref(id) => graph.node(id).cloned(),
        Target::Attr(_) => None,
    }
}

fn toggled(mut node: Node) -> Node {
    node.toggle_polarity();
    node
}

/// Splits a conditional root into (antecedent, consequent-without-condition).
fn split_conditional(graph: &AmrGraph) -> Option<(Node, Node)> {
    let mut cons = graph.root().clone();
    let at = cons.edges.iter().position(|e| e.role.is("condition"))?;
    let edge = cons.edges.remove(at);
    let ante = operand_node(graph, &edge)?;
    Some((ante, cons))
}

fn conditional(antecedent: Node, consequent: Node) -> Node {
    consequent.with_edge(Edge::child(":condition", antecedent))
}

fn split_binary(graph: &AmrGraph) -> Option<(Node, Node)> {
    let root = graph.root();
    let a = operand_node(graph, root.edges.first()?)?;
    let b = operand_node(graph, root.edges.get(1)?)?;
    Some((a, b))
}

fn binary(concept: &str, a: Node, b: Node) -> Node {
    Node::new("a", concept)
        .with_edge(Edge::child(":op1", a))
        .with_edge(Edge::child(":op2", b))
}

pub fn applicable_laws(graph: &AmrGraph, lexicon: &Lexicon) -> BTreeSet<LawKind> {
    let mut out = BTreeSet::new();
    match Shape::from_graph(graph) {
        Ok(Shape::IfThen { .. }) => {
            out.insert(LawKind::Contraposition);
            out.insert(LawKind::Implication);
        }
        Ok(Shape::Or(..)) => {
            out.insert(LawKind::Implication);
        }
        Ok(Shape::And(..)) => {
            out.insert(LawKind::Commutative);
        }
        Ok(Shape::Atomic(c)) => {
            if let Predicate::Adjective(a) = &c.predicate {
                if !c.negated && lexicon.antonym_of(a).is_some() {
                    out.insert(LawKind::DoubleNegation);
                }
            }
        }
        Err(_) => {}
    }
    out
}

pub fn apply_contraposition(graph: &AmrGraph) -> Result<RewriteOutcome, LawError> {
    let not_applicable = LawError::NotApplicable {
        law: LawKind::Contraposition,
        reason: "root is not a conditional",
    };
    if !matches!(Shape::from_graph(graph), Ok(Shape::IfThen { .. })) {
        return Err(not_applicable);
    }
    let (ante, cons) = split_conditional(graph).ok_or(not_applicable)?;
    // New antecedent is the old consequent, new consequent the old antecedent.
    let pos_ante = toggled(cons);
    let pos_cons = toggled(ante);
    let positive = finish(conditional(pos_ante.clone(), pos_cons.clone()));
    let negative = finish(conditional(toggled(pos_ante), pos_cons));
    Ok(RewriteOutcome {
        positive,
        negatives: vec![negative],
        law: LawKind::Contraposition,
    })
}

pub fn apply_implication(graph: &AmrGraph) -> Result<RewriteOutcome, LawError> {
    match Shape::from_graph(graph) {
        Ok(Shape::IfThen { .. }) => {
            let (ante, cons) = split_conditional(graph).expect("checked shape");
            let positive = finish(binary("or", toggled(ante.clone()), cons.clone()));
            let negative = finish(binary("or", ante, cons));
            Ok(RewriteOutcome {
                positive,
                negatives: vec![negative],
                law: LawKind::Implication,
            })
        }
        Ok(Shape::Or(..)) => {
            let (a, b) = split_binary(graph).expect("checked shape");
            let positive = finish(conditional(toggled(a.clone()), b.clone()));
            let negative = finish(conditional(toggled(a), toggled(b)));
            Ok(RewriteOutcome {
                positive,
                negatives: vec![negative],
                law: LawKind::Implication,
            })
        }
        _ => Err(LawError::NotApplicable {
            law: LawKind::Implication,
            reason: "root is neither a conditional nor a disjunction",
        }),
    }
}

pub fn apply_commutative(graph: &AmrGraph) -> Result<RewriteOutcome, LawError> {
    if !matches!(Shape::from_graph(graph), Ok(Shape::And(..))) {
        return Err(LawError::NotApplicable {
            law: LawKind::Commutative,
            reason: "root is not a two-operand conjunction",
        });
    }
    let mut root = graph.root().clone();
    let (left, right) = root.edges.split_at_mut(1);
    std::mem::swap(&mut left[0].target, &mut right[0].target);
    let positive = finish(root);
    let (a, b) = split_binary(&positive).expect("conjunction");
    let negative = finish(binary("and", toggled(a), toggled(b)));
    Ok(RewriteOutcome {
        positive,
        negatives: vec![negative],
        law: LawKind::Commutative,
    })
}

pub fn apply_double_negation(graph: &AmrGraph, lexicon: &Lexicon) -> Result<RewriteOutcome, LawError> {
    let clause = match Shape::from_graph(graph) {
        Ok(Shape::Atomic(c)) => c,
        _ => {
            return Err(LawError::NotApplicable {
                law: LawKind::DoubleNegation,
                reason: "not an atomic clause",
            })
        }
    };
    if clause.negated {
        return Err(LawError::NotApplicable {
            law: LawKind::DoubleNegation,
            reason: "clause already carries :polarity -",
        });
    }
    let Predicate::Adjective(adj) = &clause.predicate else {
        return Err(LawError::NotApplicable {
            law: LawKind::DoubleNegation,
            reason: "predicate is not an adjective",
        });
    };
    let antonym = lexicon.antonym_of(adj).ok_or_else(|| LawError::NoAntonym(adj.clone()))?;
    let mut swapped = graph.root().clone();
    let (_, sense) = split_sense(&swapped.concept);
    swapped.concept = match sense {
        Some(s) => format!("{antonym}-{s}"),
        None => antonym.to_string(),
    };
    let negative = finish(swapped.clone());
    let positive = finish(toggled(swapped));
    Ok(RewriteOutcome {
        positive,
        negatives: vec![negative],
        law: LawKind::DoubleNegation,
    })
}

pub fn apply_law(law: LawKind, graph: &AmrGraph, lexicon: &Lexicon) -> Result<RewriteOutcome, LawError> {
    match law {
        LawKind::Contraposition => apply_contraposition(graph),
        LawKind::Implication => apply_implication(graph),
        LawKind::Commutative => apply_commutative(graph),
        LawKind::DoubleNegation => apply_double_negation(graph, lexicon),
    }
}

/// Paths (child indices from the root) of the clause predicate nodes.
fn clause_paths(graph: &AmrGraph) -> Vec<Vec<usize>> {
    let root = graph.root();
    if matches!(root.concept.as_str(), "and" | "or") {
        return vec![vec![0], vec![1]];
    }
    match root.edges.iter().position(|e| e.role.is("condition")) {
        Some(i) => vec![vec![i], vec![]],
        None => vec![vec![]],
    }
}

fn toggle_at(graph: &AmrGraph, path: &[usize]) -> Option<AmrGraph> {
    let mut root = graph.root().clone();
    let mut node = &mut root;
    for &i in path {
        node = match &mut node.edges.get_mut(i)?.target {
            Target::Node(n) => n,
            _ => return None,
        };
    }
    node.toggle_polarity();
    Some(finish(root))
}

/// Toggles polarity on one randomly chosen clause; falls back to the other
/// clauses if the first choice happens to be equivalent to the input.
pub fn polarity_flip(graph: &AmrGraph, lexicon: &Lexicon, rng: &mut impl Rng) -> Result<Option<AmrGraph>, LawError> {
    let original = to_formula(graph, lexicon)?;
    let paths = clause_paths(graph);
    let start = rng.gen_range(0..paths.len());
    for k in 0..paths.len() {
        let path = &paths[(start + k) % paths.len()];
        if let Some(g) = toggle_at(graph, path) {
            if let Ok(f) = to_formula(&g, lexicon) {
                if !equivalent(&original, &f)? {
                    return Ok(Some(g));
                }
            }
        }
    }
    Ok(None)
}

/// Draws a corpus graph that differs from `graph`, is not in `exclude`, and is
/// not logically equivalent to it.
pub fn random_negative<'a>(
    graph: &AmrGraph,
    corpus: &'a [AmrGraph],
    exclude: &[&AmrGraph],
    lexicon: &Lexicon,
    rng: &mut impl Rng,
) -> Result<&'a AmrGraph, LawError> {
    if corpus.is_empty() {
        return Err(LawError::EmptyCorpus);
    }
    let original = to_formula(graph, lexicon)?;
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let cand = &corpus[rng.gen_range(0..corpus.len())];
        if cand == graph || exclude.contains(&cand) {
            continue;
        }
        let Ok(f) = to_formula(cand, lexicon) else {
            continue;
        };
        if !equivalent(&original, &f)? {
            return Ok(cand);
        }
    }
    Err(LawError::CorpusExhausted(MAX_SAMPLE_ATTEMPTS))
}

/// Polarity-flip negative followed by a random corpus negative.
pub fn make_negatives(
    graph: &AmrGraph,
    corpus: &[AmrGraph],
    lexicon: &Lexicon,
    seed: u64,
) -> Result<Vec<AmrGraph>, LawError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    if let Some(g) = polarity_flip(graph, lexicon, &mut rng)? {
        out.push(g);
    }
    if !corpus.is_empty() {
        let exclude: Vec<&AmrGraph> = out.iter().collect();
        out.push(random_negative(graph, corpus, &exclude, lexicon, &mut rng)?.clone());
    }
    Ok(out)
}

/// Oracle check of a rewrite: positive equivalent, every negative not.
pub fn verify_outcome(original: &AmrGraph, outcome: &RewriteOutcome, lexicon: &Lexicon) -> Result<bool, LogicError> {
    let f = to_formula(original, lexicon)?;
    if !equivalent(&f, &to_formula(&outcome.positive, lexicon)?)? {
        return Ok(false);
    }
    for n in &outcome.negatives {
        if equivalent(&f, &to_formula(n, lexicon)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}
