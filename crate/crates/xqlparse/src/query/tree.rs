//! Parse trees and canonical rendering.
//!
//! A [`ParseTree`] is the structured form of a label: one [`Clause`] per
//! operation, joined by [`Connector`]s. Clauses record only the bindings that
//! were explicit in the source text; [`serialize`] re-renders a tree in
//! canonical form, which spells out every rendered slot — omitted optional
//! slots are filled from their registry defaults, so two labels that differ
//! only in how many defaults they spell out serialize identically.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::registry::{Category, OperationSpec, Registry, SlotKind};
use super::token;

/// Clause connector. `and` chains operations, `or` unions filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connector {
    And,
    Or,
}

impl Connector {
    pub fn as_str(self) -> &'static str {
        match self {
            Connector::And => "and",
            Connector::Or => "or",
        }
    }

    pub fn from_token(tok: &str) -> Option<Connector> {
        match tok {
            "and" => Some(Connector::And),
            "or" => Some(Connector::Or),
            _ => None,
        }
    }
}

/// One operation call: the operation name plus its explicit slot bindings,
/// in slot declaration order. Values are stored as their raw tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub op: String,
    pub bindings: Vec<(String, String)>,
}

impl Clause {
    pub fn new(op: impl Into<String>) -> Clause {
        Clause { op: op.into(), bindings: Vec::new() }
    }

    pub fn with(mut self, slot: impl Into<String>, value: impl Into<String>) -> Clause {
        self.bindings.push((slot.into(), value.into()));
        self
    }

    /// Explicit binding for `slot`, if any.
    pub fn get(&self, slot: &str) -> Option<&str> {
        self.bindings
            .iter()
            .find(|(name, _)| name == slot)
            .map(|(_, value)| value.as_str())
    }
}

/// A full query: clauses joined by connectors
/// (`connectors.len() == clauses.len() - 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseTree {
    pub clauses: Vec<Clause>,
    pub connectors: Vec<Connector>,
}

impl ParseTree {
    pub fn single(clause: Clause) -> ParseTree {
        ParseTree { clauses: vec![clause], connectors: Vec::new() }
    }

    /// The clause that determines what the query is *about*: the last clause
    /// outside the filter category, or the last clause overall if the query
    /// is filters all the way through.
    pub fn main_clause<'t>(&'t self, registry: &Registry) -> Option<&'t Clause> {
        self.clauses
            .iter()
            .rev()
            .find(|c| {
                registry
                    .get(&c.op)
                    .map(|spec| spec.category != Category::Filter)
                    .unwrap_or(false)
            })
            .or_else(|| self.clauses.last())
    }
}

/// Why a tree could not be rendered canonically. Trees produced by the parser
/// always render; these arise only from hand-constructed or corrupted trees.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("tree has no clauses")]
    EmptyTree,
    #[error("tree has {clauses} clauses but {connectors} connectors")]
    MalformedTree { clauses: usize, connectors: usize },
    #[error("`{0}` is not an operation in this registry")]
    UnknownOperation(String),
    #[error("operation `{op}` has no slot `{slot}`")]
    UnknownSlot { op: String, slot: String },
    #[error("operation `{op}`: required slot `{slot}` is unbound")]
    UnboundRequiredSlot { op: String, slot: String },
    #[error("operation `{op}` slot `{slot}`: `{value}` is not a valid value")]
    InvalidBinding { op: String, slot: String, value: String },
}

/// Render a tree as its canonical label: single spaces, every rendered slot
/// spelled out, omitted optional slots filled with registry defaults.
pub fn serialize(tree: &ParseTree, registry: &Registry) -> Result<String, SerializeError> {
    let full = canonicalize(tree, registry)?;
    let mut out = String::new();
    for (idx, clause) in full.clauses.iter().enumerate() {
        if idx > 0 {
            out.push(' ');
            out.push_str(full.connectors[idx - 1].as_str());
            out.push(' ');
        }
        out.push_str(&clause.op);
        let spec = registry.get(&clause.op).expect("canonicalize checked");
        for slot in spec.rendered_slots() {
            let value = clause.get(&slot.name).expect("canonicalize bound every slot");
            out.push(' ');
            if slot.kind == SlotKind::Integer {
                out.push_str(&slot.name);
                out.push(' ');
            }
            out.push_str(value);
        }
    }
    Ok(out)
}

/// A copy of `tree` with every rendered slot bound: explicit bindings are
/// kept (reordered into declaration order), omitted optional slots take their
/// defaults. Fails on trees that bind unknown slots, bind invalid values, or
/// leave a required slot unbound.
pub fn canonicalize(tree: &ParseTree, registry: &Registry) -> Result<ParseTree, SerializeError> {
    if tree.clauses.is_empty() {
        return Err(SerializeError::EmptyTree);
    }
    if tree.connectors.len() + 1 != tree.clauses.len() {
        return Err(SerializeError::MalformedTree {
            clauses: tree.clauses.len(),
            connectors: tree.connectors.len(),
        });
    }
    let mut clauses = Vec::with_capacity(tree.clauses.len());
    for clause in &tree.clauses {
        let spec = registry
            .get(&clause.op)
            .ok_or_else(|| SerializeError::UnknownOperation(clause.op.clone()))?;
        clauses.push(canonicalize_clause(clause, spec)?);
    }
    Ok(ParseTree { clauses, connectors: tree.connectors.clone() })
}

fn canonicalize_clause(clause: &Clause, spec: &OperationSpec) -> Result<Clause, SerializeError> {
    for (name, _) in &clause.bindings {
        let known = spec.slot(name).map(|s| s.is_rendered()).unwrap_or(false);
        if !known {
            return Err(SerializeError::UnknownSlot {
                op: spec.name.clone(),
                slot: name.clone(),
            });
        }
    }
    let mut bindings = Vec::new();
    for slot in spec.rendered_slots() {
        let value = match clause.get(&slot.name) {
            Some(explicit) => {
                let ok = match slot.kind {
                    SlotKind::Integer => token::is_int_token(explicit),
                    SlotKind::EnumToken => slot.allowed_values.iter().any(|v| v == explicit),
                    SlotKind::FreeToken => token::is_free_token(explicit),
                    SlotKind::None => unreachable!("rendered_slots filters kind none"),
                };
                if !ok {
                    return Err(SerializeError::InvalidBinding {
                        op: spec.name.clone(),
                        slot: slot.name.clone(),
                        value: explicit.to_string(),
                    });
                }
                explicit.to_string()
            }
            None if slot.required => {
                return Err(SerializeError::UnboundRequiredSlot {
                    op: spec.name.clone(),
                    slot: slot.name.clone(),
                });
            }
            None => slot
                .default
                .clone()
                .expect("registry validation: optional rendered slots carry defaults"),
        };
        bindings.push((slot.name.clone(), value));
    }
    Ok(Clause { op: spec.name.clone(), bindings })
}

/// Semantic equality: both trees canonicalize and the results coincide.
/// Clauses compare by effective bindings, so an omitted default and an
/// explicit default are the same query. Trees that fail to canonicalize
/// (e.g. hand-built with a bogus operation) compare unequal to everything.
pub fn compare_parses(a: &ParseTree, b: &ParseTree, registry: &Registry) -> bool {
    match (canonicalize(a, registry), canonicalize(b, registry)) {
        (Ok(ca), Ok(cb)) => ca == cb,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialize_fills_defaults() {
        let registry = Registry::coxql();
        let tree = ParseTree::single(Clause::new("nlpattribute"));
        assert_eq!(serialize(&tree, &registry).unwrap(), "nlpattribute topk 5 attention");

        let tree = ParseTree::single(Clause::new("nlpattribute").with("method", "lime"));
        assert_eq!(serialize(&tree, &registry).unwrap(), "nlpattribute topk 5 lime");
    }

    #[test]
    fn serialize_renders_integer_slots_with_keyword() {
        let registry = Registry::coxql();
        let tree = ParseTree {
            clauses: vec![
                Clause::new("filter").with("id", "68"),
                Clause::new("influence").with("topk", "10"),
            ],
            connectors: vec![Connector::And],
        };
        assert_eq!(serialize(&tree, &registry).unwrap(), "filter id 68 and influence topk 10");
    }

    #[test]
    fn serialize_rejects_unbound_required_slot() {
        let registry = Registry::coxql();
        let tree = ParseTree::single(Clause::new("filter"));
        assert!(matches!(
            serialize(&tree, &registry),
            Err(SerializeError::UnboundRequiredSlot { .. })
        ));
    }

    #[test]
    fn serialize_rejects_invalid_binding() {
        let registry = Registry::coxql();
        let tree = ParseTree::single(Clause::new("similar").with("topk", "banana"));
        assert!(matches!(
            serialize(&tree, &registry),
            Err(SerializeError::InvalidBinding { .. })
        ));
    }

    #[test]
    fn compare_treats_defaults_as_explicit() {
        let registry = Registry::coxql();
        let bare = ParseTree::single(Clause::new("score"));
        let spelled = ParseTree::single(Clause::new("score").with("metric", "accuracy"));
        let different = ParseTree::single(Clause::new("score").with("metric", "f1"));
        assert!(compare_parses(&bare, &spelled, &registry));
        assert!(!compare_parses(&bare, &different, &registry));
    }

    #[test]
    fn main_clause_skips_filters() {
        let registry = Registry::coxql();
        let tree = ParseTree {
            clauses: vec![
                Clause::new("filter").with("id", "68"),
                Clause::new("influence").with("topk", "10"),
            ],
            connectors: vec![Connector::And],
        };
        assert_eq!(tree.main_clause(&registry).unwrap().op, "influence");

        let filters_only = ParseTree {
            clauses: vec![
                Clause::new("predictfilter").with("label", "positive"),
                Clause::new("labelfilter").with("label", "negative"),
            ],
            connectors: vec![Connector::Or],
        };
        assert_eq!(filters_only.main_clause(&registry).unwrap().op, "labelfilter");
    }
}
