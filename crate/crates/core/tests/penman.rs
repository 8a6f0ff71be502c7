mod common;

use amrlogic::amr::{parse_blocks, write_blocks};
use amrlogic::{parse_penman, AmrGraph};
use proptest::prelude::*;

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(g in common::graph()) {
        let text = g.serialize();
        let back = parse_penman(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.serialize(), text);
    }

    #[test]
    fn newlines_between_edges_do_not_matter(g in common::graph()) {
        // Only break before roles at the top level, which never sit inside a string.
        let text = g.serialize();
        let spaced = text.replacen(" :", "\n    :", 1);
        prop_assert_eq!(parse_penman(&spaced).unwrap(), g);
    }

    #[test]
    fn canonical_variables_are_idempotent(g in common::graph()) {
        let once = g.with_canonical_variables();
        prop_assert_eq!(once.with_canonical_variables(), once.clone());
        prop_assert_eq!(once.nodes().len(), g.nodes().len());
        prop_assert_eq!(parse_penman(&once.serialize()).unwrap(), once);
    }

    #[test]
    fn mutated_input_never_panics(g in common::graph(), edits in common::edits()) {
        let text = common::mutate(&g.serialize(), &edits);
        if let Ok(parsed) = parse_penman(&text) {
            prop_assert!(parsed.validate().is_ok());
        }
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,64}") {
        let _ = parse_penman(&text);
        let _ = parse_blocks(&text);
    }

    #[test]
    fn block_files_round_trip(graphs in prop::collection::vec(common::graph(), 0..5)) {
        let text = write_blocks(&graphs);
        let back: Vec<AmrGraph> = parse_blocks(&text).into_iter().map(|b| b.unwrap()).collect();
        prop_assert_eq!(back, graphs);
    }
}

#[test]
fn bridge_fixture_round_trips() {
    let text = std::fs::read_to_string(common::fixture("bridge.penman")).unwrap();
    let graphs: Vec<AmrGraph> = parse_blocks(&text).into_iter().map(|b| b.unwrap()).collect();
    assert_eq!(graphs.len(), 4);
    assert_eq!(write_blocks(&graphs), text);
}

#[test]
fn errors_carry_offsets() {
    let bad = "(a / and :op1 (b / boy) :op2 ";
    let err = parse_penman(bad).unwrap_err();
    assert!(err.offset <= bad.len());
    let text = format!("(b / boy)\n\n{bad}\n\n(g / girl)\n");
    let blocks = parse_blocks(&text);
    assert_eq!(blocks.len(), 3);
    let e = blocks[1].as_ref().unwrap_err();
    assert_eq!((e.block, e.line), (2, 3));
    assert!(blocks[2].is_ok());
}
