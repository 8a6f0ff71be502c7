//! AMR graph model and Penman notation.
//!
//! A graph is stored as its instance tree: every variable is declared exactly
//! once by a nested `(var / concept ...)` node and may be referenced again by
//! name elsewhere (re-entrancy). Edge order is preserved exactly as written,
//! since operand order carries meaning for `:op1`/`:op2` and `:condition`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Maximum nesting depth accepted by the parser.
pub const MAX_DEPTH: usize = 256;

/// Identifies a node by its variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(var: impl Into<String>) -> Self {
        NodeId(var.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An edge label such as `:ARG0` or `:polarity`. Always begins with `:`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Role(String);

impl Role {
    pub fn new(name: &str) -> Self {
        if name.starts_with(':') {
            Role(name.to_string())
        } else {
            Role(format!(":{name}"))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is(&self, name: &str) -> bool {
        self.0.strip_prefix(':') == Some(name.trim_start_matches(':'))
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A constant edge target.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttrValue {
    /// Unquoted constant: `-`, `+`, numbers, `imperative`, ...
    Symbol(String),
    /// Double-quoted string, stored unescaped.
    Quoted(String),
}

impl AttrValue {
    pub fn negative() -> Self {
        AttrValue::Symbol("-".to_string())
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, AttrValue::Symbol(s) if s == "-")
    }

    pub fn as_quoted(&self) -> Option<&str> {
        match self {
            AttrValue::Quoted(s) => Some(s),
            AttrValue::Symbol(_) => None,
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Symbol(s) => f.write_str(s),
            AttrValue::Quoted(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    /// A nested node declared at this position.
    Node(Node),
    /// A re-entrant reference to a node declared elsewhere.
    Ref(NodeId),
    Attr(AttrValue),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub role: Role,
    pub target: Target,
}

impl Edge {
    pub fn new(role: &str, target: Target) -> Self {
        Edge {
            role: Role::new(role),
            target,
        }
    }

    pub fn child(role: &str, node: Node) -> Self {
        Edge::new(role, Target::Node(node))
    }

    pub fn attr(role: &str, value: AttrValue) -> Self {
        Edge::new(role, Target::Attr(value))
    }

    pub fn polarity() -> Self {
        Edge::attr(":polarity", AttrValue::negative())
    }

    fn is_negative_polarity(&self) -> bool {
        self.role.is("polarity") && matches!(&self.target, Target::Attr(v) if v.is_negative())
    }
}

/// A variable with its concept and outgoing edges, in stored order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub variable: String,
    pub concept: String,
    pub edges: Vec<Edge>,
}

impl Node {
    pub fn new(variable: impl Into<String>, concept: impl Into<String>) -> Self {
        Node {
            variable: variable.into(),
            concept: concept.into(),
            edges: Vec::new(),
        }
    }

    pub fn with_edge(mut self, edge: Edge) -> Self {
        self.edges.push(edge);
        self
    }

    pub fn id(&self) -> NodeId {
        NodeId(self.variable.clone())
    }

    /// First edge target with the given role.
    pub fn get(&self, role: &str) -> Option<&Target> {
        self.edges.iter().find(|e| e.role.is(role)).map(|e| &e.target)
    }

    pub fn child(&self, role: &str) -> Option<&Node> {
        match self.get(role) {
            Some(Target::Node(n)) => Some(n),
            _ => None,
        }
    }

    pub fn has_polarity(&self) -> bool {
        self.edges.iter().any(Edge::is_negative_polarity)
    }

    /// Inserts `:polarity -` before the first `:condition` edge, or at the end.
    pub(crate) fn insert_polarity(&mut self) {
        let at = self
            .edges
            .iter()
            .position(|e| e.role.is("condition"))
            .unwrap_or(self.edges.len());
        self.edges.insert(at, Edge::polarity());
    }

    pub(crate) fn strip_polarity(&mut self) {
        if let Some(at) = self.edges.iter().position(Edge::is_negative_polarity) {
            self.edges.remove(at);
        }
    }

    pub(crate) fn toggle_polarity(&mut self) {
        if self.has_polarity() {
            self.strip_polarity();
        } else {
            self.insert_polarity();
        }
    }

    fn find(&self, var: &str) -> Option<&Node> {
        if self.variable == var {
            return Some(self);
        }
        self.edges.iter().find_map(|e| match &e.target {
            Target::Node(n) => n.find(var),
            _ => None,
        })
    }

    fn find_mut(&mut self, var: &str) -> Option<&mut Node> {
        if self.variable == var {
            return Some(self);
        }
        self.edges.iter_mut().find_map(|e| match &mut e.target {
            Target::Node(n) => n.find_mut(var),
            _ => None,
        })
    }

    fn walk<'a>(&'a self, out: &mut Vec<&'a Node>) {
        out.push(self);
        for e in &self.edges {
            if let Target::Node(n) = &e.target {
                n.walk(out);
            }
        }
    }

    fn write_penman(&self, out: &mut String) {
        out.push('(');
        out.push_str(&self.variable);
        out.push_str(" / ");
        out.push_str(&self.concept);
        for e in &self.edges {
            out.push(' ');
            out.push_str(e.role.as_str());
            out.push(' ');
            match &e.target {
                Target::Node(n) => n.write_penman(out),
                Target::Ref(id) => out.push_str(id.as_str()),
                Target::Attr(v) => out.push_str(&v.to_string()),
            }
        }
        out.push(')');
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmrError {
    #[error("unknown node id `{0}`")]
    UnknownNode(NodeId),
    #[error("polarity state conflict at `{node}` (has polarity: {has_polarity})")]
    PolarityConflict { node: NodeId, has_polarity: bool },
}

/// A rooted AMR graph. Values are immutable; every transformation returns a
/// new graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AmrGraph {
    root: Node,
}

impl AmrGraph {
    /// Wraps an instance tree, checking variable uniqueness and that every
    /// re-entrant reference names a declared variable.
    pub fn from_root(root: Node) -> Result<Self, GraphInvariantError> {
        let g = AmrGraph { root };
        g.validate()?;
        Ok(g)
    }

    pub(crate) fn from_root_unchecked(root: Node) -> Self {
        AmrGraph { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn root_id(&self) -> NodeId {
        self.root.id()
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    /// All nodes in depth-first declaration order.
    pub fn nodes(&self) -> Vec<&Node> {
        let mut out = Vec::new();
        self.root.walk(&mut out);
        out
    }

    /// All edges as `(source variable, role, target)` in serialization order.
    pub fn edges(&self) -> Vec<(&str, &Role, &Target)> {
        self.nodes()
            .into_iter()
            .flat_map(|n| n.edges.iter().map(move |e| (n.variable.as_str(), &e.role, &e.target)))
            .collect()
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.root.find(id.as_str())
    }

    pub fn validate(&self) -> Result<(), GraphInvariantError> {
        let mut declared = HashSet::new();
        for n in self.nodes() {
            if n.concept.is_empty() {
                return Err(GraphInvariantError::EmptyConcept(n.variable.clone()));
            }
            check_sense(&n.concept).map_err(|_| GraphInvariantError::BadSense(n.concept.clone()))?;
            if !declared.insert(n.variable.as_str()) {
                return Err(GraphInvariantError::DuplicateVariable(n.variable.clone()));
            }
        }
        for (_, role, target) in self.edges() {
            if role.as_str().len() < 2 || !role.as_str().starts_with(':') {
                return Err(GraphInvariantError::BadRole(role.to_string()));
            }
            if let Target::Ref(id) = target {
                if !declared.contains(id.as_str()) {
                    return Err(GraphInvariantError::UndeclaredVariable(id.0.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn find_polarity(&self, node: &NodeId) -> Result<bool, AmrError> {
        self.node(node)
            .map(Node::has_polarity)
            .ok_or_else(|| AmrError::UnknownNode(node.clone()))
    }

    pub fn add_polarity(&self, node: &NodeId) -> Result<AmrGraph, AmrError> {
        let mut g = self.clone();
        let n = g
            .root
            .find_mut(node.as_str())
            .ok_or_else(|| AmrError::UnknownNode(node.clone()))?;
        if n.has_polarity() {
            return Err(AmrError::PolarityConflict {
                node: node.clone(),
                has_polarity: true,
            });
        }
        n.insert_polarity();
        Ok(g)
    }

    pub fn remove_polarity(&self, node: &NodeId) -> Result<AmrGraph, AmrError> {
        let mut g = self.clone();
        let n = g
            .root
            .find_mut(node.as_str())
            .ok_or_else(|| AmrError::UnknownNode(node.clone()))?;
        if !n.has_polarity() {
            return Err(AmrError::PolarityConflict {
                node: node.clone(),
                has_polarity: false,
            });
        }
        n.strip_polarity();
        Ok(g)
    }

    pub fn toggle_polarity(&self, node: &NodeId) -> Result<AmrGraph, AmrError> {
        if self.find_polarity(node)? {
            self.remove_polarity(node)
        } else {
            self.add_polarity(node)
        }
    }

    /// Renames variables AMR-style: first letter of the concept, numbered on
    /// collision (`p`, `p2`, ...), assigned in depth-first order.
    pub fn with_canonical_variables(&self) -> AmrGraph {
        let mut counts: HashMap<char, usize> = HashMap::new();
        let mut renames: HashMap<String, String> = HashMap::new();
        for n in self.nodes() {
            let letter = n
                .concept
                .chars()
                .next()
                .filter(char::is_ascii_alphabetic)
                .map(|c| c.to_ascii_lowercase())
                .unwrap_or('x');
            let k = counts.entry(letter).or_insert(0);
            *k += 1;
            let var = if *k == 1 {
                letter.to_string()
            } else {
                format!("{letter}{k}")
            };
            renames.insert(n.variable.clone(), var);
        }
        fn rename(node: &Node, map: &HashMap<String, String>) -> Node {
            Node {
                variable: map[&node.variable].clone(),
                concept: node.concept.clone(),
                edges: node
                    .edges
                    .iter()
                    .map(|e| Edge {
                        role: e.role.clone(),
                        target: match &e.target {
                            Target::Node(n) => Target::Node(rename(n, map)),
                            Target::Ref(id) => Target::Ref(NodeId(
                                map.get(id.as_str()).cloned().unwrap_or_else(|| id.0.clone()),
                            )),
                            Target::Attr(v) => Target::Attr(v.clone()),
                        },
                    })
                    .collect(),
            }
        }
        AmrGraph {
            root: rename(&self.root, &renames),
        }
    }

    /// Canonical single-line Penman form.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        self.root.write_penman(&mut out);
        out
    }
}

impl fmt::Display for AmrGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphInvariantError {
    #[error("node `{0}` has an empty concept")]
    EmptyConcept(String),
    #[error("concept `{0}` has a malformed sense suffix")]
    BadSense(String),
    #[error("variable `{0}` declared more than once")]
    DuplicateVariable(String),
    #[error("reference to undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("malformed role `{0}`")]
    BadRole(String),
}

fn check_sense(concept: &str) -> Result<(), ()> {
    if let Some((_, suffix)) = concept.rsplit_once('-') {
        if !suffix.is_empty() && suffix.bytes().all(|b| b.is_ascii_digit()) && suffix.len() != 2 {
            return Err(());
        }
    }
    Ok(())
}

/// Splits a trailing two-digit sense: `work-01` -> (`work`, Some("01")).
pub fn split_sense(concept: &str) -> (&str, Option<&str>) {
    match concept.rsplit_once('-') {
        Some((stem, sense))
            if !stem.is_empty() && sense.len() == 2 && sense.bytes().all(|b| b.is_ascii_digit()) =>
        {
            (stem, Some(sense))
        }
        _ => (concept, None),
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnbalancedParens,
    DuplicateVariable,
    UndeclaredVariable,
    EmptyRole,
    MissingConcept,
    BadSense,
    MissingTarget,
    UnexpectedToken,
    UnterminatedString,
    TrailingInput,
    TooDeep,
    Empty,
}

impl ParseErrorKind {
    fn reason(self) -> &'static str {
        match self {
            ParseErrorKind::UnbalancedParens => "unbalanced parentheses",
            ParseErrorKind::DuplicateVariable => "duplicate instance declaration",
            ParseErrorKind::UndeclaredVariable => "undeclared variable",
            ParseErrorKind::EmptyRole => "empty role name",
            ParseErrorKind::MissingConcept => "missing concept",
            ParseErrorKind::BadSense => "malformed sense suffix",
            ParseErrorKind::MissingTarget => "role without target",
            ParseErrorKind::UnexpectedToken => "unexpected token",
            ParseErrorKind::UnterminatedString => "unterminated string",
            ParseErrorKind::TrailingInput => "trailing input after graph",
            ParseErrorKind::TooDeep => "nesting too deep",
            ParseErrorKind::Empty => "empty input",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PenmanError {
    pub kind: ParseErrorKind,
    pub offset: usize,
    pub detail: String,
}

impl fmt::Display for PenmanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at byte {}", self.kind.reason(), self.offset)?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

impl std::error::Error for PenmanError {}

impl PenmanError {
    fn new(kind: ParseErrorKind, offset: usize, detail: impl Into<String>) -> Self {
        PenmanError {
            kind,
            offset,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Slash,
    Role(&'a str),
    Symbol(&'a str),
    Quoted(String),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    peeked: Option<Option<(usize, Tok<'a>)>>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            peeked: None,
        }
    }

    fn peek(&mut self) -> Result<Option<&(usize, Tok<'a>)>, PenmanError> {
        if self.peeked.is_none() {
            let t = self.lex()?;
            self.peeked = Some(t);
        }
        Ok(self.peeked.as_ref().and_then(|t| t.as_ref()))
    }

    fn next(&mut self) -> Result<Option<(usize, Tok<'a>)>, PenmanError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex(),
        }
    }

    fn lex(&mut self) -> Result<Option<(usize, Tok<'a>)>, PenmanError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(start) else {
            return Ok(None);
        };
        let tok = match b {
            b'(' => {
                self.pos += 1;
                Tok::Open
            }
            b')' => {
                self.pos += 1;
                Tok::Close
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'"' => {
                let mut s = String::new();
                let mut chars = self.src[start + 1..].char_indices();
                loop {
                    match chars.next() {
                        None => {
                            return Err(PenmanError::new(
                                ParseErrorKind::UnterminatedString,
                                start,
                                "",
                            ))
                        }
                        Some((i, '"')) => {
                            self.pos = start + 1 + i + 1;
                            break;
                        }
                        Some((_, '\\')) => match chars.next() {
                            Some((_, c)) => s.push(c),
                            None => {
                                return Err(PenmanError::new(
                                    ParseErrorKind::UnterminatedString,
                                    start,
                                    "",
                                ))
                            }
                        },
                        Some((_, c)) => s.push(c),
                    }
                }
                Tok::Quoted(s)
            }
            _ => {
                let end = self.src[start..]
                    .find(|c: char| c.is_ascii_whitespace() || matches!(c, '(' | ')' | '/' | '"'))
                    .map_or(self.src.len(), |i| start + i);
                self.pos = end;
                let text = &self.src[start..end];
                if text.starts_with(':') {
                    Tok::Role(text)
                } else {
                    Tok::Symbol(text)
                }
            }
        };
        Ok(Some((start, tok)))
    }
}

enum Pending {
    Symbol { node_path: Vec<usize>, edge: usize, name: String, offset: usize },
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    declared: HashMap<String, usize>,
    pending: Vec<Pending>,
}

impl<'a> Parser<'a> {
    fn node(&mut self, open_at: usize, depth: usize, path: &mut Vec<usize>) -> Result<Node, PenmanError> {
        if depth > MAX_DEPTH {
            return Err(PenmanError::new(ParseErrorKind::TooDeep, open_at, ""));
        }
        let (var_at, variable) = match self.lexer.next()? {
            Some((at, Tok::Symbol(s))) => (at, s.to_string()),
            Some((at, t)) => {
                return Err(PenmanError::new(
                    ParseErrorKind::UnexpectedToken,
                    at,
                    format!("expected variable, found {}", describe(&t)),
                ))
            }
            None => return Err(PenmanError::new(ParseErrorKind::UnbalancedParens, open_at, "")),
        };
        if self.declared.insert(variable.clone(), var_at).is_some() {
            return Err(PenmanError::new(ParseErrorKind::DuplicateVariable, var_at, variable));
        }
        match self.lexer.next()? {
            Some((_, Tok::Slash)) => {}
            Some((at, _)) => return Err(PenmanError::new(ParseErrorKind::MissingConcept, at, variable)),
            None => return Err(PenmanError::new(ParseErrorKind::UnbalancedParens, open_at, "")),
        }
        let concept = match self.lexer.next()? {
            Some((at, Tok::Symbol(s))) => {
                check_sense(s)
                    .map_err(|_| PenmanError::new(ParseErrorKind::BadSense, at, s.to_string()))?;
                s.to_string()
            }
            Some((at, _)) => return Err(PenmanError::new(ParseErrorKind::MissingConcept, at, variable)),
            None => return Err(PenmanError::new(ParseErrorKind::UnbalancedParens, open_at, "")),
        };
        let mut node = Node::new(variable, concept);
        loop {
            match self.lexer.next()? {
                Some((_, Tok::Close)) => return Ok(node),
                Some((at, Tok::Role(r))) => {
                    if r.len() == 1 {
                        return Err(PenmanError::new(ParseErrorKind::EmptyRole, at, ""));
                    }
                    let target = match self.lexer.next()? {
                        Some((child_at, Tok::Open)) => {
                            path.push(node.edges.len());
                            let child = self.node(child_at, depth + 1, path)?;
                            path.pop();
                            Target::Node(child)
                        }
                        Some((_, Tok::Quoted(s))) => Target::Attr(AttrValue::Quoted(s)),
                        Some((sym_at, Tok::Symbol(s))) => {
                            self.pending.push(Pending::Symbol {
                                node_path: path.clone(),
                                edge: node.edges.len(),
                                name: s.to_string(),
                                offset: sym_at,
                            });
                            // Resolved once every declaration has been seen.
                            Target::Attr(AttrValue::Symbol(s.to_string()))
                        }
                        Some((t_at, _)) => {
                            return Err(PenmanError::new(ParseErrorKind::MissingTarget, t_at, r.to_string()))
                        }
                        None => return Err(PenmanError::new(ParseErrorKind::UnbalancedParens, open_at, "")),
                    };
                    node.edges.push(Edge {
                        role: Role(r.to_string()),
                        target,
                    });
                }
                Some((at, t)) => {
                    return Err(PenmanError::new(
                        ParseErrorKind::UnexpectedToken,
                        at,
                        format!("expected role or `)`, found {}", describe(&t)),
                    ))
                }
                None => return Err(PenmanError::new(ParseErrorKind::UnbalancedParens, open_at, "")),
            }
        }
    }
}

fn describe(t: &Tok<'_>) -> String {
    match t {
        Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Role(r) => format!("role `{r}`"),
        Tok::Symbol(s) => format!("`{s}`"),
        Tok::Quoted(s) => format!("string {s:?}"),
    }
}

fn looks_like_variable(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_digit())
}

fn node_at_path<'n>(root: &'n mut Node, path: &[usize]) -> &'n mut Node {
    let mut cur = root;
    for &i in path {
        cur = match &mut cur.edges[i].target {
            Target::Node(n) => n,
            _ => unreachable!("path only follows nested nodes"),
        };
    }
    cur
}

/// Parses a single Penman expression.
pub fn parse_penman(text: &str) -> Result<AmrGraph, PenmanError> {
    let mut p = Parser {
        lexer: Lexer::new(text),
        declared: HashMap::new(),
        pending: Vec::new(),
    };
    let mut root = match p.lexer.next()? {
        Some((at, Tok::Open)) => p.node(at, 0, &mut Vec::new())?,
        Some((at, Tok::Close)) => return Err(PenmanError::new(ParseErrorKind::UnbalancedParens, at, "")),
        Some((at, t)) => {
            return Err(PenmanError::new(
                ParseErrorKind::UnexpectedToken,
                at,
                format!("expected `(`, found {}", describe(&t)),
            ))
        }
        None => return Err(PenmanError::new(ParseErrorKind::Empty, 0, "")),
    };
    if let Some(&(at, ref t)) = p.lexer.peek()? {
        let kind = if *t == Tok::Close {
            ParseErrorKind::UnbalancedParens
        } else {
            ParseErrorKind::TrailingInput
        };
        return Err(PenmanError::new(kind, at, ""));
    }
    for pending in std::mem::take(&mut p.pending) {
        let Pending::Symbol {
            node_path,
            edge,
            name,
            offset,
        } = pending;
        if p.declared.contains_key(&name) {
            node_at_path(&mut root, &node_path).edges[edge].target = Target::Ref(NodeId(name));
        } else if looks_like_variable(&name) {
            return Err(PenmanError::new(ParseErrorKind::UndeclaredVariable, offset, name));
        }
    }
    Ok(AmrGraph::from_root_unchecked(root))
}

/// One entry of a Penman block file.
pub type BlockResult = Result<AmrGraph, BlockError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("block {block} (line {line}): {error}")]
pub struct BlockError {
    /// 1-based block number.
    pub block: usize,
    /// 1-based line where the block starts.
    pub line: usize,
    pub error: PenmanError,
}

/// Parses a file of blank-line separated Penman blocks. Lines starting with
/// `#` are comments. Each block yields a graph or a located error.
pub fn parse_blocks(text: &str) -> Vec<BlockResult> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start_line = 0;
    let flush = |current: &mut String, start_line: usize, out: &mut Vec<BlockResult>| {
        if current.trim().is_empty() {
            current.clear();
            return;
        }
        let block = out.len() + 1;
        out.push(parse_penman(current).map_err(|error| BlockError {
            block,
            line: start_line,
            error,
        }));
        current.clear();
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            flush(&mut current, start_line, &mut out);
            continue;
        }
        if line.trim_start().starts_with('#') {
            continue;
        }
        if current.is_empty() {
            start_line = i + 1;
        }
        current.push_str(line);
        current.push('\n');
    }
    flush(&mut current, start_line, &mut out);
    out
}

/// Writes graphs as blank-line separated canonical blocks.
pub fn write_blocks<'a>(graphs: impl IntoIterator<Item = &'a AmrGraph>) -> String {
    let mut out = String::new();
    for g in graphs {
        out.push_str(&g.serialize());
        out.push_str("\n\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_polarity_attribute() {
        let g = parse_penman("(w / work-01 :polarity -)").unwrap();
        assert_eq!(g.nodes().len(), 1);
        assert_eq!(g.root().concept, "work-01");
        let edges = g.edges();
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].0, "w");
        assert!(edges[0].1.is("polarity"));
        assert_eq!(edges[0].2, &Target::Attr(AttrValue::negative()));
    }

    #[test]
    fn single_node_serializes() {
        let g = AmrGraph::from_root(Node::new("b", "boy")).unwrap();
        assert_eq!(g.serialize(), "(b / boy)");
    }

    #[test]
    fn whitespace_is_irrelevant() {
        let a = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        let b = parse_penman("(w/want-01\n   :ARG0 (b / boy)\n\t:ARG1 (g /go-02\n :ARG0 b ) )").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.serialize(), b.serialize());
    }

    #[test]
    fn reentrancy_becomes_reference() {
        let g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        let go = g.node(&NodeId::new("g")).unwrap();
        assert_eq!(go.get("ARG0"), Some(&Target::Ref(NodeId::new("b"))));
    }

    #[test]
    fn forward_reference_resolves() {
        let g = parse_penman("(a / and :op1 x :op2 (x / x1))").unwrap();
        assert_eq!(g.root().get("op1"), Some(&Target::Ref(NodeId::new("x"))));
    }

    #[test]
    fn quoted_and_numeric_constants() {
        let text = r#"(p / person :name (n / name :op1 "Sarah") :quant 1 :mode imperative)"#;
        let g = parse_penman(text).unwrap();
        assert_eq!(g.serialize(), text);
        let n = g.node(&NodeId::new("n")).unwrap();
        assert_eq!(n.get("op1"), Some(&Target::Attr(AttrValue::Quoted("Sarah".into()))));
    }

    #[test]
    fn escaped_quotes_round_trip() {
        let text = r#"(s / say-01 :ARG1 "he said \"hi\" \\ bye")"#;
        let g = parse_penman(text).unwrap();
        assert_eq!(parse_penman(&g.serialize()).unwrap(), g);
    }

    #[test]
    fn undeclared_variable_is_located() {
        let err = parse_penman("(a / and :op1 (x / x1) :op2 y)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndeclaredVariable);
        assert_eq!(err.offset, 28);
        assert!(err.to_string().contains("undeclared variable"));
    }

    #[test]
    fn duplicate_declaration() {
        let err = parse_penman("(a / and :op1 (x / x1) :op2 (x / x2))").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateVariable);
        assert_eq!(err.offset, 29);
    }

    #[test]
    fn unbalanced_parens() {
        let err = parse_penman("(a / and :op1 (b / boy)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnbalancedParens);
        assert_eq!(err.offset, 0);
        let err = parse_penman("(a / and))").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnbalancedParens);
        assert_eq!(err.offset, 9);
    }

    #[test]
    fn empty_role() {
        let err = parse_penman("(a / and : (b / boy))").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::EmptyRole);
        assert_eq!(err.offset, 9);
    }

    #[test]
    fn malformed_sense() {
        assert_eq!(parse_penman("(w / work-1)").unwrap_err().kind, ParseErrorKind::BadSense);
        assert!(parse_penman("(d / date-entity)").is_ok());
        assert!(parse_penman("(w / wake-up-02)").is_ok());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let mut s = String::new();
        for i in 0..5000 {
            s.push_str(&format!("(v{i} / c :ARG0 "));
        }
        let err = parse_penman(&s).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TooDeep);
    }

    #[test]
    fn polarity_add_remove_are_inverse() {
        let g = parse_penman("(s / strong-01 :ARG1 (e / eagle :mod (b / bald)))").unwrap();
        let id = NodeId::new("s");
        assert!(!g.find_polarity(&id).unwrap());
        let neg = g.add_polarity(&id).unwrap();
        assert!(neg.find_polarity(&id).unwrap());
        assert_eq!(neg.edges().len(), g.edges().len() + 1);
        assert_eq!(neg.remove_polarity(&id).unwrap(), g);
        assert!(matches!(
            neg.add_polarity(&id),
            Err(AmrError::PolarityConflict { has_polarity: true, .. })
        ));
        assert!(matches!(
            g.remove_polarity(&id),
            Err(AmrError::PolarityConflict { has_polarity: false, .. })
        ));
        assert!(neg.add_polarity(&id).unwrap_err().to_string().contains("polarity state conflict"));
        assert_eq!(g.find_polarity(&NodeId::new("zz")), Err(AmrError::UnknownNode(NodeId::new("zz"))));
    }

    #[test]
    fn polarity_goes_before_condition() {
        let g = parse_penman("(c / clever-01 :ARG1 (b / bob) :condition (k / kind-01 :ARG1 (a / alan)))").unwrap();
        let g = g.add_polarity(&NodeId::new("c")).unwrap();
        assert_eq!(
            g.serialize(),
            "(c / clever-01 :ARG1 (b / bob) :polarity - :condition (k / kind-01 :ARG1 (a / alan)))"
        );
    }

    #[test]
    fn canonical_variables() {
        let g = parse_penman("(zz / and :op1 (q / person) :op2 (r / person :ARG0 q))").unwrap();
        assert_eq!(
            g.with_canonical_variables().serialize(),
            "(a / and :op1 (p / person) :op2 (p2 / person :ARG0 p))"
        );
    }

    #[test]
    fn block_file_partial_failure() {
        let text = "# ::snt one\n(a / alpha)\n\n(b / beta\n\n(c / gamma :ARG0 (d / delta))\n";
        let blocks = parse_blocks(text);
        assert_eq!(blocks.len(), 3);
        assert!(blocks[0].is_ok());
        let err = blocks[1].as_ref().unwrap_err();
        assert_eq!((err.block, err.line), (2, 4));
        assert_eq!(err.error.kind, ParseErrorKind::UnbalancedParens);
        assert!(blocks[2].is_ok());
    }
}
