//! Logic-driven data augmentation over AMR graphs.
//!
//! Sentences in a small controlled grammar are mapped to canonical AMR
//! graphs, rewritten with propositional equivalence laws, and checked by a
//! truth-table oracle before being emitted as contrastive pairs or prompt
//! augmentations.

pub mod amr;
pub mod contrastive;
pub mod dataset;
pub mod grammar;
pub mod laws;
pub mod lexicon;
pub mod logic;
pub mod prompt;
pub mod realizer;
pub mod synth;

pub use amr::{parse_penman, AmrGraph, NodeId, PenmanError};
pub use grammar::Shape;
pub use laws::{applicable_laws, LawKind, RewriteOutcome};
pub use lexicon::Lexicon;
pub use logic::{equivalent, is_tautology, to_formula, Formula};
pub use realizer::{parse_sentence, realize};

/// Lowercase hex SHA-256 of `data`; used for manifests and checksums.
pub fn sha256_hex(data: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(data))
}
