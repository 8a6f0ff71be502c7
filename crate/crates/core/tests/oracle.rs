mod common;

use amrlogic::logic::{LogicError, MAX_ATOMS};
use amrlogic::{equivalent, is_tautology, parse_sentence, to_formula, Formula, Lexicon};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn agrees_with_shannon_expansion(f in common::formula(4), g in common::formula(4)) {
        prop_assert_eq!(equivalent(&f, &g).unwrap(), common::shannon_equivalent(&f, &g));
    }
}

proptest! {
    #[test]
    fn equivalence_is_reflexive_and_symmetric(f in common::formula(5), g in common::formula(5)) {
        prop_assert!(equivalent(&f, &f).unwrap());
        prop_assert_eq!(equivalent(&f, &g).unwrap(), equivalent(&g, &f).unwrap());
    }

    #[test]
    fn standard_laws_hold(a in common::formula(3), b in common::formula(3)) {
        let not = |x: &Formula| Formula::not(x.clone());
        let laws = [
            (Formula::implies(a.clone(), b.clone()), Formula::implies(not(&b), not(&a))),
            (Formula::implies(a.clone(), b.clone()), Formula::or(not(&a), b.clone())),
            (Formula::and(a.clone(), b.clone()), Formula::and(b.clone(), a.clone())),
            (a.clone(), Formula::not(not(&a))),
            (not(&Formula::and(a.clone(), b.clone())), Formula::or(not(&a), not(&b))),
        ];
        for (l, r) in &laws {
            prop_assert!(equivalent(l, r).unwrap(), "{} vs {}", l, r);
        }
    }

    #[test]
    fn tautology_matches_equivalence_to_true(f in common::formula(4), g in common::formula(4)) {
        prop_assert_eq!(is_tautology(&Formula::iff(f.clone(), g.clone())).unwrap(), equivalent(&f, &g).unwrap());
        prop_assert!(is_tautology(&Formula::or(f.clone(), Formula::not(f.clone()))).unwrap());
    }
}

#[test]
fn atom_budget_is_enforced() {
    let mut f = Formula::atom("s0", "p");
    for i in 1..=MAX_ATOMS {
        f = Formula::and(f, Formula::atom(&format!("s{i}"), "p"));
    }
    match is_tautology(&f) {
        Err(LogicError::AtomBudget { atoms }) => assert_eq!(atoms, MAX_ATOMS + 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sentence_level_examples() {
    let lex = Lexicon::default_lexicon();
    let f = |s: &str| to_formula(&parse_sentence(s).unwrap(), &lex).unwrap();
    let eq = |a: &str, b: &str| equivalent(&f(a), &f(b)).unwrap();
    assert!(eq("If Alan is kind, then Bob is clever.", "If Bob is not clever, then Alan is not kind."));
    assert!(!eq("If Alan is kind, then Bob is clever.", "If Bob is clever, then Alan is kind."));
    assert!(eq("The bald eagle is strong.", "The bald eagle is not weak."));
    assert!(!eq("The bald eagle is strong.", "The bald eagle is weak."));
    assert!(eq("It is raining.", "It is not the case that it is not raining."));
}
