//! Controlled-grammar sentence shapes and their canonical AMR encoding.
//!
//! Frames used:
//!
//! | clause                  | graph                                              |
//! |-------------------------|----------------------------------------------------|
//! | `X is ADJ`              | `(a / ADJ-01 :ARG1 X)`                             |
//! | `X is able to VP`       | `(c / capable-01 :ARG1 X :ARG2 "VP")`              |
//! | `X has NP`              | `(h / have-03 :ARG0 X :ARG1 "NP")`                 |
//! | `If A, then B`          | B's predicate node with `:condition` A             |
//! | `A and B` / `A or B`    | `(a / and :op1 A :op2 B)`                          |
//!
//! Named subjects become `(p / person :name (n / name :op1 "Alan"))`, common
//! nouns `(e / eagle :mod (b / bald))`, pronouns `(y / you)`.

use thiserror::Error;

use crate::amr::{split_sense, AmrGraph, AttrValue, Edge, Node, Target};

pub const PRONOUNS: &[&str] = &["i", "you", "he", "she", "it", "we", "they", "someone", "something"];

const ABLE_FRAME: &str = "capable-01";
const HAVE_FRAME: &str = "have-03";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported structure: {0}")]
pub struct UnsupportedStructure(pub String);

fn unsupported<T>(msg: impl Into<String>) -> Result<T, UnsupportedStructure> {
    Err(UnsupportedStructure(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    /// Proper name, stored with its capitalization.
    Named(String),
    /// Lowercase pronoun from [`PRONOUNS`].
    Pronoun(String),
    /// Definite noun phrase `the MOD* HEAD`.
    Common { modifiers: Vec<String>, head: String },
}

impl Subject {
    /// Parses a lexicon entity string such as `the bald eagle` or `Anne`.
    pub fn from_words(words: &[&str]) -> Option<Subject> {
        let first = *words.first()?;
        if first.eq_ignore_ascii_case("the") {
            let rest = &words[1..];
            if rest.is_empty() || !rest.iter().all(|w| is_lower_word(w)) {
                return None;
            }
            let (head, mods) = rest.split_last()?;
            return Some(Subject::Common {
                modifiers: mods.iter().map(|s| s.to_string()).collect(),
                head: head.to_string(),
            });
        }
        if words.len() != 1 {
            return None;
        }
        let lower = first.to_ascii_lowercase();
        if PRONOUNS.contains(&lower.as_str()) {
            return Some(Subject::Pronoun(lower));
        }
        let mut chars = first.chars();
        let initial = chars.next()?;
        if initial.is_uppercase() && chars.all(char::is_alphabetic) {
            return Some(Subject::Named(first.to_string()));
        }
        None
    }

    pub fn parse(entity: &str) -> Option<Subject> {
        let words: Vec<&str> = entity.split_whitespace().collect();
        Subject::from_words(&words)
    }

    /// Key used for formula atoms: `Alan`, `bald eagle`, `you`.
    pub fn key(&self) -> String {
        match self {
            Subject::Named(n) => n.clone(),
            Subject::Pronoun(p) => p.clone(),
            Subject::Common { modifiers, head } => {
                let mut parts = modifiers.clone();
                parts.push(head.clone());
                parts.join(" ")
            }
        }
    }

    pub fn surface(&self) -> String {
        match self {
            Subject::Named(n) => n.clone(),
            Subject::Pronoun(p) if p == "i" => "I".to_string(),
            Subject::Pronoun(p) => p.clone(),
            Subject::Common { .. } => format!("the {}", self.key()),
        }
    }

    fn plural(&self) -> bool {
        matches!(self, Subject::Pronoun(p) if matches!(p.as_str(), "you" | "we" | "they"))
    }

    fn copula(&self) -> &'static str {
        match self {
            Subject::Pronoun(p) if p == "i" => "am",
            s if s.plural() => "are",
            _ => "is",
        }
    }

    fn have(&self) -> &'static str {
        match self {
            Subject::Pronoun(p) if p == "i" => "have",
            s if s.plural() => "have",
            _ => "has",
        }
    }

    fn to_node(&self, fresh: &mut Fresh) -> Node {
        match self {
            Subject::Named(name) => Node::new(fresh.next(), "person").with_edge(Edge::child(
                ":name",
                Node::new(fresh.next(), "name").with_edge(Edge::attr(":op1", AttrValue::Quoted(name.clone()))),
            )),
            Subject::Pronoun(p) => Node::new(fresh.next(), p.clone()),
            Subject::Common { modifiers, head } => {
                let mut node = Node::new(fresh.next(), head.clone());
                for m in modifiers {
                    node = node.with_edge(Edge::child(":mod", Node::new(fresh.next(), m.clone())));
                }
                node
            }
        }
    }

    fn from_node(node: &Node, graph: &AmrGraph) -> Result<Subject, UnsupportedStructure> {
        if node.concept == "person" {
            if let [e] = node.edges.as_slice() {
                if e.role.is("name") {
                    let name = resolve(&e.target, graph).ok_or_else(|| UnsupportedStructure("person without name".into()))?;
                    if let [op] = name.edges.as_slice() {
                        if name.concept == "name" && op.role.is("op1") {
                            if let Target::Attr(AttrValue::Quoted(s)) = &op.target {
                                return Ok(Subject::Named(s.clone()));
                            }
                        }
                    }
                    return unsupported("malformed name node");
                }
            }
        }
        if PRONOUNS.contains(&node.concept.as_str()) && node.edges.is_empty() {
            return Ok(Subject::Pronoun(node.concept.clone()));
        }
        if !is_lower_word(&node.concept) {
            return unsupported(format!("subject concept `{}`", node.concept));
        }
        let mut modifiers = Vec::new();
        for e in &node.edges {
            if !e.role.is("mod") {
                return unsupported(format!("subject role `{}`", e.role));
            }
            match resolve(&e.target, graph) {
                Some(m) if m.edges.is_empty() && is_lower_word(&m.concept) => modifiers.push(m.concept.clone()),
                _ => return unsupported("complex modifier"),
            }
        }
        Ok(Subject::Common {
            modifiers,
            head: node.concept.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Adjective(String),
    /// `be able to VP`; the verb phrase is stored verbatim.
    Able(String),
    /// `have NP`.
    Have(String),
}

impl Predicate {
    pub fn key(&self) -> String {
        match self {
            Predicate::Adjective(a) => a.clone(),
            Predicate::Able(vp) => format!("be able to {vp}"),
            Predicate::Have(np) => format!("have {np}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub subject: Subject,
    pub predicate: Predicate,
    pub negated: bool,
}

impl Clause {
    pub fn new(subject: Subject, predicate: Predicate, negated: bool) -> Self {
        Clause {
            subject,
            predicate,
            negated,
        }
    }

    pub fn adjective(subject: Subject, adj: &str, negated: bool) -> Self {
        Clause::new(subject, Predicate::Adjective(adj.to_string()), negated)
    }

    pub fn toggled(&self) -> Clause {
        Clause {
            negated: !self.negated,
            ..self.clone()
        }
    }

    /// Surface form without capitalization or final period.
    pub fn surface(&self) -> String {
        let subj = self.subject.surface();
        let not = if self.negated { "not " } else { "" };
        match &self.predicate {
            Predicate::Adjective(a) => format!("{subj} {} {not}{a}", self.subject.copula()),
            Predicate::Able(vp) => format!("{subj} {} {not}able to {vp}", self.subject.copula()),
            Predicate::Have(np) if self.negated => format!("{subj} {} no {np}", self.subject.have()),
            Predicate::Have(np) => format!("{subj} {} {np}", self.subject.have()),
        }
    }

    fn to_node(&self, fresh: &mut Fresh) -> Node {
        let var = fresh.next();
        let subj = self.subject.to_node(fresh);
        let mut node = match &self.predicate {
            Predicate::Adjective(a) => Node::new(var, format!("{a}-01")).with_edge(Edge::child(":ARG1", subj)),
            Predicate::Able(vp) => Node::new(var, ABLE_FRAME)
                .with_edge(Edge::child(":ARG1", subj))
                .with_edge(Edge::attr(":ARG2", AttrValue::Quoted(vp.clone()))),
            Predicate::Have(np) => Node::new(var, HAVE_FRAME)
                .with_edge(Edge::child(":ARG0", subj))
                .with_edge(Edge::attr(":ARG1", AttrValue::Quoted(np.clone()))),
        };
        if self.negated {
            node.insert_polarity();
        }
        node
    }

    /// Reads a predicate node. `:condition` edges are ignored here; the
    /// caller handles them.
    fn from_node(node: &Node, graph: &AmrGraph) -> Result<Clause, UnsupportedStructure> {
        let mut negated = false;
        let mut args: Vec<&Edge> = Vec::new();
        for e in &node.edges {
            if e.role.is("polarity") {
                match &e.target {
                    Target::Attr(v) if v.is_negative() && !negated => negated = true,
                    _ => return unsupported("polarity value"),
                }
            } else if !e.role.is("condition") {
                args.push(e);
            }
        }
        let quoted = |e: &Edge| match &e.target {
            Target::Attr(AttrValue::Quoted(s)) if !s.trim().is_empty() => Some(s.clone()),
            _ => None,
        };
        let subject_of = |e: &Edge| -> Result<Subject, UnsupportedStructure> {
            match resolve(&e.target, graph) {
                Some(n) => Subject::from_node(n, graph),
                None => unsupported("subject is not a node"),
            }
        };
        let predicate_subject = match (node.concept.as_str(), args.as_slice()) {
            (ABLE_FRAME, [a1, a2]) if a1.role.is("ARG1") && a2.role.is("ARG2") && quoted(a2).is_some() => {
                Some((Predicate::Able(quoted(a2).unwrap()), subject_of(a1)?))
            }
            (HAVE_FRAME, [a0, a1]) if a0.role.is("ARG0") && a1.role.is("ARG1") && quoted(a1).is_some() => {
                Some((Predicate::Have(quoted(a1).unwrap()), subject_of(a0)?))
            }
            _ => None,
        };
        if let Some((predicate, subject)) = predicate_subject {
            return Ok(Clause::new(subject, predicate, negated));
        }
        let (stem, _) = split_sense(&node.concept);
        if !is_lower_word(stem) || matches!(stem, "and" | "or") {
            return unsupported(format!("predicate concept `{}`", node.concept));
        }
        match args.as_slice() {
            [a1] if a1.role.is("ARG1") => Ok(Clause::new(
                subject_of(a1)?,
                Predicate::Adjective(stem.to_string()),
                negated,
            )),
            _ => unsupported(format!("arguments of `{}`", node.concept)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Shape {
    Atomic(Clause),
    And(Clause, Clause),
    Or(Clause, Clause),
    IfThen { antecedent: Clause, consequent: Clause },
}

impl Shape {
    pub fn clauses(&self) -> Vec<&Clause> {
        match self {
            Shape::Atomic(c) => vec![c],
            Shape::And(a, b) | Shape::Or(a, b) => vec![a, b],
            Shape::IfThen { antecedent, consequent } => vec![antecedent, consequent],
        }
    }

    /// Canonical graph with AMR-style variable names.
    pub fn to_graph(&self) -> AmrGraph {
        let mut fresh = Fresh(0);
        let root = match self {
            Shape::Atomic(c) => c.to_node(&mut fresh),
            Shape::And(a, b) | Shape::Or(a, b) => {
                let concept = if matches!(self, Shape::And(..)) { "and" } else { "or" };
                let var = fresh.next();
                Node::new(var, concept)
                    .with_edge(Edge::child(":op1", a.to_node(&mut fresh)))
                    .with_edge(Edge::child(":op2", b.to_node(&mut fresh)))
            }
            Shape::IfThen { antecedent, consequent } => {
                let cons = consequent.to_node(&mut fresh);
                cons.with_edge(Edge::child(":condition", antecedent.to_node(&mut fresh)))
            }
        };
        AmrGraph::from_root_unchecked(root).with_canonical_variables()
    }

    pub fn from_graph(graph: &AmrGraph) -> Result<Shape, UnsupportedStructure> {
        let root = graph.root();
        if matches!(root.concept.as_str(), "and" | "or") {
            let ops: Vec<&Edge> = root.edges.iter().collect();
            let [op1, op2] = ops.as_slice() else {
                return unsupported(format!("`{}` must have exactly two operands", root.concept));
            };
            if !(op1.role.is("op1") && op2.role.is("op2")) {
                return unsupported(format!("`{}` roles", root.concept));
            }
            let a = operand(op1, graph)?;
            let b = operand(op2, graph)?;
            return Ok(if root.concept == "and" { Shape::And(a, b) } else { Shape::Or(a, b) });
        }
        let conditions: Vec<&Edge> = root.edges.iter().filter(|e| e.role.is("condition")).collect();
        match conditions.as_slice() {
            [] => Ok(Shape::Atomic(Clause::from_node(root, graph)?)),
            [c] => {
                let consequent = Clause::from_node(root, graph)?;
                let antecedent = operand(c, graph)?;
                Ok(Shape::IfThen { antecedent, consequent })
            }
            _ => unsupported("more than one condition"),
        }
    }

    /// Canonical sentence: capitalized, with a final period.
    pub fn realize(&self) -> String {
        let body = match self {
            Shape::Atomic(c) => c.surface(),
            Shape::And(a, b) => format!("{} and {}", a.surface(), b.surface()),
            Shape::Or(a, b) => format!("{} or {}", a.surface(), b.surface()),
            Shape::IfThen { antecedent, consequent } => {
                format!("If {}, then {}", antecedent.surface(), consequent.surface())
            }
        };
        format!("{}.", capitalize(&body))
    }
}

fn operand(edge: &Edge, graph: &AmrGraph) -> Result<Clause, UnsupportedStructure> {
    match resolve(&edge.target, graph) {
        Some(n) if n.get("condition").is_none() => Clause::from_node(n, graph),
        Some(_) => unsupported("nested condition"),
        None => unsupported("operand is not a node"),
    }
}

fn resolve<'a>(target: &'a Target, graph: &'a AmrGraph) -> Option<&'a Node> {
    match target {
        Target::Node(n) => Some(n),
        Target::Ref(id) => graph.node(id),
        Target::Attr(_) => None,
    }
}

pub(crate) fn is_lower_word(w: &str) -> bool {
    !w.is_empty() && w.bytes().all(|b| b.is_ascii_lowercase())
}

pub(crate) fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

struct Fresh(usize);

impl Fresh {
    fn next(&mut self) -> String {
        self.0 += 1;
        format!("v{}", self.0)
    }
}
