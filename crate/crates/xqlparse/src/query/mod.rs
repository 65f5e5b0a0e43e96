//! The typed query language: registries, parsing, canonical serialization,
//! and template repair.
//!
//! A *label* is the structured form of a user's explanation request, e.g.
//! `filter id 68 and nlpattribute topk 10 attention`. Its vocabulary comes
//! from a [`Registry`]: operations grouped into categories, each with a typed
//! slot signature. [`parse_label`] maps labels to [`ParseTree`]s,
//! [`serialize`] renders trees canonically (defaults spelled out), and
//! [`template_check`] classifies near-miss labels as valid, repairable, or
//! rejected.

mod check;
mod parser;
mod registry;
pub mod token;
mod tree;

pub use check::{template_check, CheckResult};
pub use parser::{parse_label, ParseError, END_OF_LABEL};
pub use registry::{Category, OperationSpec, Registry, RegistryError, SlotKind, SlotSpec};
pub use tree::{canonicalize, compare_parses, serialize, Clause, Connector, ParseTree, SerializeError};

#[cfg(test)]
mod roundtrip_tests {
    use super::*;

    /// Parsing a serialized tree and re-serializing is the identity on
    /// canonical strings, for every operation in both bundled registries.
    #[test]
    fn serialize_parse_serialize_is_stable() {
        for registry in [Registry::coxql(), Registry::compass()] {
            for op in registry.clause_operations() {
                let mut clause = Clause::new(&op.name);
                for slot in op.rendered_slots() {
                    let value = match slot.kind {
                        SlotKind::Integer => "7".to_string(),
                        SlotKind::EnumToken => slot.allowed_values[0].clone(),
                        SlotKind::FreeToken => "positive".to_string(),
                        SlotKind::None => continue,
                    };
                    clause.bindings.push((slot.name.clone(), value));
                }
                let tree = ParseTree::single(clause);
                let rendered = serialize(&tree, &registry).unwrap();
                let reparsed = parse_label(&rendered, &registry).unwrap();
                assert_eq!(serialize(&reparsed, &registry).unwrap(), rendered);
                assert!(compare_parses(&tree, &reparsed, &registry));
            }
        }
    }
}
