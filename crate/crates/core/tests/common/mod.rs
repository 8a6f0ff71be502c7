#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use amrlogic::amr::{AttrValue, Edge, Node, NodeId, Target};
use amrlogic::grammar::{Clause, Shape, Subject};
use amrlogic::logic::{clause_formula, Atom, Formula};
use amrlogic::{AmrGraph, Lexicon};
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

// ---- structured Penman graphs ----

#[derive(Debug, Clone)]
enum Proto {
    Node { concept: String, edges: Vec<(String, Proto)> },
    Quoted(String),
    Symbol(String),
    Ref(usize),
}

fn concept() -> impl Strategy<Value = String> {
    ("[a-z][a-z]{0,7}(-[a-z]{2,5})?", prop::option::of(1u8..=9)).prop_map(|(stem, sense)| match sense {
        Some(s) => format!("{stem}-0{s}"),
        None => stem,
    })
}

fn role() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "ARG0", "ARG1", "ARG2", "ARG1-of", "mod", "op1", "op2", "name", "polarity", "condition", "quant", "time",
    ])
    .prop_map(String::from)
}

fn leaf() -> impl Strategy<Value = Proto> {
    prop_oneof![
        concept().prop_map(|c| Proto::Node { concept: c, edges: vec![] }),
        "[ -~]{0,12}".prop_map(Proto::Quoted),
        "[^\u{0}-\u{1f}]{0,6}".prop_map(Proto::Quoted),
        prop::sample::select(vec!["-", "+", "imperative", "expressive", "0.5", "-3"]).prop_map(|s| Proto::Symbol(s.into())),
        (0u32..10_000).prop_map(|n| Proto::Symbol(n.to_string())),
        any::<usize>().prop_map(Proto::Ref),
    ]
}

fn proto_tree() -> impl Strategy<Value = Proto> {
    let edges = |inner: BoxedStrategy<Proto>| prop::collection::vec((role(), inner), 0..4);
    let nested = leaf().prop_recursive(5, 40, 4, move |inner| {
        (concept(), edges(inner.boxed())).prop_map(|(concept, edges)| Proto::Node { concept, edges })
    });
    (concept(), prop::collection::vec((role(), nested), 0..5)).prop_map(|(concept, edges)| Proto::Node { concept, edges })
}

fn build(p: &Proto, next: &mut usize) -> Node {
    let Proto::Node { concept, edges } = p else {
        unreachable!("only nodes are built")
    };
    let letter = concept.chars().next().unwrap();
    let mut node = Node::new(format!("{letter}{}", *next), concept.clone());
    *next += 1;
    for (role, target) in edges {
        let edge = match target {
            Proto::Node { .. } => Edge::child(role, build(target, next)),
            Proto::Quoted(s) => Edge::attr(role, AttrValue::Quoted(s.clone())),
            Proto::Symbol(s) => Edge::attr(role, AttrValue::Symbol(s.clone())),
            Proto::Ref(_) => continue,
        };
        node = node.with_edge(edge);
    }
    node
}

/// Assigns variables `<letter><preorder index>`; references then point at
/// any declared node, possibly forward or to an ancestor.
fn materialize(p: &Proto) -> AmrGraph {
    let mut next = 0;
    let mut root = build(p, &mut next);
    let mut vars = Vec::new();
    collect_vars(&root, &mut vars);
    let mut refs = Vec::new();
    collect_refs(p, &mut refs);
    attach_refs(&mut root, &mut refs.into_iter(), &vars);
    AmrGraph::from_root(root).expect("generated graph is valid")
}

fn collect_vars(n: &Node, out: &mut Vec<String>) {
    out.push(n.variable.clone());
    for e in &n.edges {
        if let Target::Node(c) = &e.target {
            collect_vars(c, out);
        }
    }
}

// Ref slots in preorder, as (node preorder index, role, k).
fn collect_refs(p: &Proto, out: &mut Vec<(usize, String, usize)>) {
    fn go(p: &Proto, idx: &mut usize, out: &mut Vec<(usize, String, usize)>) {
        let Proto::Node { edges, .. } = p else { return };
        let me = *idx;
        *idx += 1;
        for (role, t) in edges {
            match t {
                Proto::Ref(k) => out.push((me, role.clone(), *k)),
                Proto::Node { .. } => go(t, idx, out),
                _ => {}
            }
        }
    }
    go(p, &mut 0, out);
}

fn attach_refs(root: &mut Node, refs: &mut impl Iterator<Item = (usize, String, usize)>, vars: &[String]) {
    let refs: Vec<_> = refs.collect();
    fn go(n: &mut Node, idx: &mut usize, refs: &[(usize, String, usize)], vars: &[String]) {
        let me = *idx;
        *idx += 1;
        for e in n.edges.iter_mut() {
            if let Target::Node(c) = &mut e.target {
                go(c, idx, refs, vars);
            }
        }
        for (_, role, k) in refs.iter().filter(|(i, _, _)| *i == me) {
            n.edges.push(Edge::new(role, Target::Ref(NodeId::new(vars[k % vars.len()].clone()))));
        }
    }
    go(root, &mut 0, &refs, vars);
}

pub fn graph() -> impl Strategy<Value = AmrGraph> {
    proto_tree().prop_map(|p| materialize(&p))
}

/// Applies (position, op, char) edits: 0 delete, 1 insert, otherwise replace.
pub fn mutate(text: &str, edits: &[(usize, u8, char)]) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for &(pos, op, c) in edits {
        if chars.is_empty() {
            chars.push(c);
            continue;
        }
        let i = pos % chars.len();
        match op % 3 {
            0 => {
                chars.remove(i);
            }
            1 => chars.insert(i, c),
            _ => chars[i] = c,
        }
    }
    chars.into_iter().collect()
}

pub fn edits() -> impl Strategy<Value = Vec<(usize, u8, char)>> {
    prop::collection::vec((any::<usize>(), any::<u8>(), prop::sample::select("()/:\"\\- ax01\n~".chars().collect::<Vec<_>>())), 1..6)
}

// ---- independent propositional oracle ----

fn collect_atoms(f: &Formula, out: &mut BTreeSet<Atom>) {
    match f {
        Formula::Atom(a) => {
            out.insert(a.clone());
        }
        Formula::Not(x) => collect_atoms(x, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
    }
}

/// Substitutes a constant for `atom`, folding constants away.
#[derive(Debug, Clone)]
enum Partial {
    Const(bool),
    Open(Formula),
}

fn restrict(f: &Formula, atom: &Atom, value: bool) -> Partial {
    use Partial::*;
    match f {
        Formula::Atom(a) if a == atom => Const(value),
        Formula::Atom(_) => Open(f.clone()),
        Formula::Not(x) => match restrict(x, atom, value) {
            Const(b) => Const(!b),
            Open(g) => Open(Formula::not(g)),
        },
        Formula::And(a, b) => match (restrict(a, atom, value), restrict(b, atom, value)) {
            (Const(false), _) | (_, Const(false)) => Const(false),
            (Const(true), x) | (x, Const(true)) => x,
            (Open(x), Open(y)) => Open(Formula::and(x, y)),
        },
        Formula::Or(a, b) => match (restrict(a, atom, value), restrict(b, atom, value)) {
            (Const(true), _) | (_, Const(true)) => Const(true),
            (Const(false), x) | (x, Const(false)) => x,
            (Open(x), Open(y)) => Open(Formula::or(x, y)),
        },
        Formula::Implies(a, b) => match (restrict(a, atom, value), restrict(b, atom, value)) {
            (Const(false), _) | (_, Const(true)) => Const(true),
            (Const(true), x) => x,
            (x, Const(false)) => match x {
                Const(b) => Const(!b),
                Open(g) => Open(Formula::not(g)),
            },
            (Open(x), Open(y)) => Open(Formula::implies(x, y)),
        },
    }
}

fn tautology(p: Partial, atoms: &[Atom]) -> bool {
    match p {
        Partial::Const(b) => b,
        Partial::Open(f) => {
            let (first, rest) = atoms.split_first().expect("open formula has an atom left");
            tautology(restrict(&f, first, true), rest) && tautology(restrict(&f, first, false), rest)
        }
    }
}

/// Equivalence by Shannon expansion of `f <-> g`, independent of the
/// library's enumerator.
pub fn shannon_equivalent(f: &Formula, g: &Formula) -> bool {
    let mut atoms = BTreeSet::new();
    collect_atoms(f, &mut atoms);
    collect_atoms(g, &mut atoms);
    let atoms: Vec<Atom> = atoms.into_iter().collect();
    let iff = Formula::and(Formula::implies(f.clone(), g.clone()), Formula::implies(g.clone(), f.clone()));
    tautology(Partial::Open(iff), &atoms)
}

pub fn formula(atoms: usize) -> impl Strategy<Value = Formula> {
    let leaf = (0..atoms).prop_map(|i| Formula::atom(&format!("s{i}"), "p"));
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

// ---- controlled-grammar shapes over the default lexicon ----

pub fn clause() -> impl Strategy<Value = Clause> {
    let lex = Lexicon::default_lexicon();
    let entities = lex.entities().to_vec();
    let attributes = lex.attributes().to_vec();
    (prop::sample::select(entities), prop::sample::select(attributes), any::<bool>())
        .prop_map(|(e, a, neg)| Clause::adjective(Subject::parse(&e).expect("lexicon entity"), &a, neg))
}

/// Two clauses over different atoms (antonyms share an atom).
fn clause_pair() -> impl Strategy<Value = (Clause, Clause)> {
    let lex = Lexicon::default_lexicon();
    (clause(), clause()).prop_filter("clauses share an atom", move |(a, b)| {
        clause_formula(a, &lex).atoms() != clause_formula(b, &lex).atoms()
    })
}

pub fn conditional() -> impl Strategy<Value = Shape> {
    clause_pair().prop_map(|(antecedent, consequent)| Shape::IfThen { antecedent, consequent })
}

pub fn conjunction() -> impl Strategy<Value = Shape> {
    clause_pair().prop_map(|(a, b)| Shape::And(a, b))
}

pub fn disjunction() -> impl Strategy<Value = Shape> {
    clause_pair().prop_map(|(a, b)| Shape::Or(a, b))
}

pub fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![clause().prop_map(Shape::Atomic), conditional(), conjunction(), disjunction()]
}
