//! Propositional meaning of grammar graphs and a truth-table oracle.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::amr::AmrGraph;
use crate::grammar::{Clause, Predicate, Shape, UnsupportedStructure};
use crate::lexicon::Lexicon;

/// Largest atom set the oracle will enumerate.
pub const MAX_ATOMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error(transparent)]
    Unsupported(#[from] UnsupportedStructure),
    #[error("atom budget exceeded: {atoms} atoms (max {MAX_ATOMS})")]
    AtomBudget { atoms: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub subject: String,
    pub attribute: String,
}

impl Atom {
    pub fn new(subject: impl Into<String>, attribute: impl Into<String>) -> Self {
        Atom {
            subject: subject.into(),
            attribute: attribute.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(subject: &str, attribute: &str) -> Formula {
        Formula::Atom(Atom::new(subject, attribute))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// `(a -> b) & (b -> a)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    /// Negation that cancels an outer `Not` instead of stacking one.
    pub fn negated(self) -> Formula {
        match self {
            Formula::Not(inner) => *inner,
            f => Formula::not(f),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Evaluates under an assignment given as a lookup closure.
    pub fn eval(&self, value: &impl Fn(&Atom) -> bool) -> bool {
        match self {
            Formula::Atom(a) => value(a),
            Formula::Not(f) => !f.eval(value),
            Formula::And(a, b) => a.eval(value) && b.eval(value),
            Formula::Or(a, b) => a.eval(value) || b.eval(value),
            Formula::Implies(a, b) => !a.eval(value) || b.eval(value),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "[{} {}]", a.subject, a.attribute),
            Formula::Not(x) => write!(f, "~{x}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
        }
    }
}

/// Literal for one clause. Antonym-side adjectives become a negated base
/// atom; a clause-level `not` over it cancels rather than stacking.
pub fn clause_formula(clause: &Clause, lexicon: &Lexicon) -> Formula {
    let subject = clause.subject.key();
    let (atom, flipped) = match &clause.predicate {
        Predicate::Adjective(a) => {
            let (base, flipped) = lexicon.normalize_attribute(a);
            (Formula::atom(&subject, base), flipped)
        }
        p => (Formula::atom(&subject, &p.key()), false),
    };
    if flipped != clause.negated {
        Formula::not(atom)
    } else {
        atom
    }
}

pub fn shape_formula(shape: &Shape, lexicon: &Lexicon) -> Formula {
    let lit = |c: &Clause| clause_formula(c, lexicon);
    match shape {
        Shape::Atomic(c) => lit(c),
        Shape::And(a, b) => Formula::and(lit(a), lit(b)),
        Shape::Or(a, b) => Formula::or(lit(a), lit(b)),
        Shape::IfThen { antecedent, consequent } => Formula::implies(lit(antecedent), lit(consequent)),
    }
}

pub fn to_formula(graph: &AmrGraph, lexicon: &Lexicon) -> Result<Formula, LogicError> {
    let shape = Shape::from_graph(graph)?;
    Ok(shape_formula(&shape, lexicon))
}

fn ordered_atoms(fs: &[&Formula]) -> Result<Vec<Atom>, LogicError> {
    let mut set = BTreeSet::new();
    for f in fs {
        f.collect_atoms(&mut set);
    }
    if set.len() > MAX_ATOMS {
        return Err(LogicError::AtomBudget { atoms: set.len() });
    }
    Ok(set.into_iter().collect())
}

fn all_assignments(atoms: &[Atom], mut check: impl FnMut(&dyn Fn(&Atom) -> bool) -> bool) -> bool {
    for bits in 0u32..(1u32 << atoms.len()) {
        let value = |a: &Atom| {
            let i = atoms.binary_search(a).expect("atom collected");
            bits & (1 << i) != 0
        };
        if !check(&value) {
            return false;
        }
    }
    true
}

/// True iff both formulas agree on every assignment of their joint atoms.
pub fn equivalent(f1: &Formula, f2: &Formula) -> Result<bool, LogicError> {
    let atoms = ordered_atoms(&[f1, f2])?;
    Ok(all_assignments(&atoms, |v| f1.eval(&v) == f2.eval(&v)))
}

pub fn is_tautology(f: &Formula) -> Result<bool, LogicError> {
    let atoms = ordered_atoms(&[f])?;
    Ok(all_assignments(&atoms, |v| f.eval(&v)))
}
