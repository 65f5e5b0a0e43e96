//! Label parsing.
//!
//! [`parse_label`] turns a label string into a [`ParseTree`], rejecting
//! anything outside the language. Parsing is greedy recursive descent over
//! whitespace-separated tokens: each clause starts at an operation name and
//! then tries its rendered slots in declaration order. Because integer slots
//! are introduced by their keyword and enum slots by a closed vocabulary,
//! one token of lookahead decides every slot without backtracking.
//!
//! The tree records **explicit** bindings only — `nlpattribute` and
//! `nlpattribute topk 5 attention` parse to different trees that compare
//! equal under [`super::compare_parses`].

use thiserror::Error;

use super::registry::{Category, Registry, SlotKind};
use super::token;
use super::tree::{Clause, Connector, ParseTree};

/// Why a label was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("label is empty")]
    Empty,
    #[error("`{0}` is not an operation")]
    UnknownOperation(String),
    #[error("operation `{op}`: slot `{slot}` expects {expected}, found `{found}`")]
    BadSlotValue {
        op: String,
        slot: String,
        expected: String,
        /// The offending token, or [`END_OF_LABEL`] when the label stopped short.
        found: String,
    },
    #[error("operation `{op}`: required slot `{slot}` is missing")]
    MissingSlot { op: String, slot: String },
    #[error("connector `{0}` is not joining two operations")]
    DanglingConnector(String),
    #[error("unexpected trailing token `{0}`")]
    TrailingTokens(String),
}

/// Placeholder used in [`ParseError::BadSlotValue::found`] when the label
/// ended where a value was expected. Tokens never contain spaces, so this
/// cannot collide with a real token.
pub const END_OF_LABEL: &str = "(end of label)";

/// Parse a label against a registry.
pub fn parse_label(label: &str, registry: &Registry) -> Result<ParseTree, ParseError> {
    let tokens: Vec<&str> = label.split_whitespace().collect();
    let mut walker = Walker::new(&tokens, registry);
    let mut clauses = vec![walker.parse_clause()?];
    let mut connectors = Vec::new();
    while let Some(tok) = walker.peek() {
        let Some(conn) = walker.connector(tok) else {
            return Err(ParseError::TrailingTokens(tok.to_string()));
        };
        walker.bump();
        if walker.peek().is_none() {
            return Err(ParseError::DanglingConnector(conn.as_str().to_string()));
        }
        connectors.push(conn);
        clauses.push(walker.parse_clause()?);
    }
    Ok(ParseTree { clauses, connectors })
}

/// Greedy token cursor shared by [`parse_label`] and the template checker.
pub(crate) struct Walker<'a> {
    tokens: &'a [&'a str],
    pos: usize,
    registry: &'a Registry,
}

impl<'a> Walker<'a> {
    pub(crate) fn new(tokens: &'a [&'a str], registry: &'a Registry) -> Walker<'a> {
        Walker { tokens, pos: 0, registry }
    }

    pub(crate) fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).copied()
    }

    pub(crate) fn bump(&mut self) {
        self.pos += 1;
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos == self.tokens.len()
    }

    /// `tok` interpreted as a connector, if this registry admits it as one.
    pub(crate) fn connector(&self, tok: &str) -> Option<Connector> {
        let is_logic = self
            .registry
            .get(tok)
            .map(|op| op.category == Category::Logic)
            .unwrap_or(false);
        if is_logic {
            Connector::from_token(tok)
        } else {
            None
        }
    }

    /// Parse one clause starting at the cursor. On success the cursor sits
    /// just past the clause; on failure its position is unspecified.
    pub(crate) fn parse_clause(&mut self) -> Result<Clause, ParseError> {
        let Some(op_tok) = self.peek() else {
            return Err(ParseError::Empty);
        };
        if self.connector(op_tok).is_some() {
            return Err(ParseError::DanglingConnector(op_tok.to_string()));
        }
        let Some(spec) = self.registry.get(op_tok) else {
            return Err(ParseError::UnknownOperation(op_tok.to_string()));
        };
        self.bump();
        let mut clause = Clause::new(&spec.name);
        for slot in spec.rendered_slots() {
            let next = self.peek();
            match slot.kind {
                SlotKind::Integer => {
                    // Introduced by its keyword: `topk 10`.
                    if next != Some(slot.name.as_str()) {
                        if slot.required {
                            return Err(ParseError::MissingSlot {
                                op: spec.name.clone(),
                                slot: slot.name.clone(),
                            });
                        }
                        continue;
                    }
                    self.bump();
                    match self.peek() {
                        Some(value) if token::is_int_token(value) => {
                            clause.bindings.push((slot.name.clone(), value.to_string()));
                            self.bump();
                        }
                        other => {
                            return Err(ParseError::BadSlotValue {
                                op: spec.name.clone(),
                                slot: slot.name.clone(),
                                expected: "an integer (at most nine digits, no leading zero)"
                                    .to_string(),
                                found: other.unwrap_or(END_OF_LABEL).to_string(),
                            });
                        }
                    }
                }
                SlotKind::EnumToken => {
                    match next {
                        Some(value) if slot.allowed_values.iter().any(|v| v == value) => {
                            clause.bindings.push((slot.name.clone(), value.to_string()));
                            self.bump();
                        }
                        _ if !slot.required => {}
                        // Required: a connector or the label's end means the
                        // slot was skipped; any other token is a bad value.
                        None => {
                            return Err(ParseError::MissingSlot {
                                op: spec.name.clone(),
                                slot: slot.name.clone(),
                            });
                        }
                        Some(value) if self.connector(value).is_some() => {
                            return Err(ParseError::MissingSlot {
                                op: spec.name.clone(),
                                slot: slot.name.clone(),
                            });
                        }
                        Some(value) => {
                            return Err(ParseError::BadSlotValue {
                                op: spec.name.clone(),
                                slot: slot.name.clone(),
                                expected: format!("one of {}", slot.allowed_values.join(", ")),
                                found: value.to_string(),
                            });
                        }
                    }
                }
                SlotKind::FreeToken => {
                    match next {
                        Some(value) if token::is_free_token(value) => {
                            clause.bindings.push((slot.name.clone(), value.to_string()));
                            self.bump();
                        }
                        _ if !slot.required => {}
                        None => {
                            return Err(ParseError::MissingSlot {
                                op: spec.name.clone(),
                                slot: slot.name.clone(),
                            });
                        }
                        Some(value) if self.connector(value).is_some() => {
                            return Err(ParseError::MissingSlot {
                                op: spec.name.clone(),
                                slot: slot.name.clone(),
                            });
                        }
                        Some(value) => {
                            return Err(ParseError::BadSlotValue {
                                op: spec.name.clone(),
                                slot: slot.name.clone(),
                                expected: "an identifier".to_string(),
                                found: value.to_string(),
                            });
                        }
                    }
                }
                SlotKind::None => unreachable!("rendered_slots filters kind none"),
            }
        }
        Ok(clause)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coxql() -> Registry {
        Registry::coxql()
    }

    #[test]
    fn parses_filter_chain() {
        let tree = parse_label("filter id 68 and influence topk 10", &coxql()).unwrap();
        assert_eq!(tree.clauses.len(), 2);
        assert_eq!(tree.connectors, vec![Connector::And]);
        assert_eq!(tree.clauses[0].op, "filter");
        assert_eq!(tree.clauses[0].get("id"), Some("68"));
        assert_eq!(tree.clauses[1].op, "influence");
        assert_eq!(tree.clauses[1].get("topk"), Some("10"));
    }

    #[test]
    fn parses_bare_operation_without_defaults() {
        let tree = parse_label("nlpattribute", &coxql()).unwrap();
        assert_eq!(tree.clauses[0].bindings, Vec::<(String, String)>::new());
    }

    #[test]
    fn parses_partially_specified_slots() {
        // `topk` omitted, `method` explicit: enum slots need no keyword.
        let tree = parse_label("nlpattribute lime", &coxql()).unwrap();
        assert_eq!(tree.clauses[0].get("method"), Some("lime"));
        assert_eq!(tree.clauses[0].get("topk"), None);
    }

    #[test]
    fn parses_required_enum_then_required_integer() {
        let tree = parse_label("lengthfilter words len 10", &coxql()).unwrap();
        assert_eq!(tree.clauses[0].get("level"), Some("words"));
        assert_eq!(tree.clauses[0].get("len"), Some("10"));
    }

    #[test]
    fn parses_or_between_filters() {
        let tree = parse_label("predictfilter positive or labelfilter negative", &coxql()).unwrap();
        assert_eq!(tree.connectors, vec![Connector::Or]);
    }

    #[test]
    fn free_slot_may_name_an_operation() {
        let tree = parse_label("tutorial predict", &coxql()).unwrap();
        assert_eq!(tree.clauses[0].get("op_name"), Some("predict"));
    }

    #[test]
    fn rejects_bad_value_after_committed_keyword() {
        let err = parse_label("similar topk banana", &coxql()).unwrap_err();
        assert!(matches!(err, ParseError::BadSlotValue { op, slot, .. }
            if op == "similar" && slot == "topk"));
    }

    #[test]
    fn rejects_integer_with_leading_zero() {
        let err = parse_label("filter id 068", &coxql()).unwrap_err();
        assert!(matches!(err, ParseError::BadSlotValue { .. }));
    }

    #[test]
    fn rejects_missing_required_slot() {
        let err = parse_label("filter", &coxql()).unwrap_err();
        assert!(matches!(err, ParseError::MissingSlot { op, slot }
            if op == "filter" && slot == "id"));

        let err = parse_label("mistake and predict", &coxql()).unwrap_err();
        assert!(matches!(err, ParseError::MissingSlot { op, slot }
            if op == "mistake" && slot == "mode"));
    }

    #[test]
    fn rejects_unknown_operation() {
        let err = parse_label("banana", &coxql()).unwrap_err();
        assert!(matches!(err, ParseError::UnknownOperation(tok) if tok == "banana"));
    }

    #[test]
    fn rejects_dangling_connectors() {
        assert!(matches!(
            parse_label("and predict", &coxql()).unwrap_err(),
            ParseError::DanglingConnector(tok) if tok == "and"
        ));
        assert!(matches!(
            parse_label("predict and", &coxql()).unwrap_err(),
            ParseError::DanglingConnector(tok) if tok == "and"
        ));
        assert!(matches!(
            parse_label("predict and or show", &coxql()).unwrap_err(),
            ParseError::DanglingConnector(tok) if tok == "or"
        ));
    }

    #[test]
    fn rejects_trailing_tokens() {
        let err = parse_label("predict banana", &coxql()).unwrap_err();
        assert!(matches!(err, ParseError::TrailingTokens(tok) if tok == "banana"));
    }

    #[test]
    fn rejects_empty_label() {
        assert!(matches!(parse_label("", &coxql()).unwrap_err(), ParseError::Empty));
        assert!(matches!(parse_label("   ", &coxql()).unwrap_err(), ParseError::Empty));
    }

    #[test]
    fn connectors_are_plain_tokens_without_a_logic_operation() {
        // The coarse intent registry has no logic category, so `and` is just
        // an unparseable trailing token there.
        let compass = Registry::compass();
        let err = parse_label("predict and rationalize", &compass).unwrap_err();
        assert!(matches!(err, ParseError::TrailingTokens(tok) if tok == "and"));
    }

    #[test]
    fn whitespace_is_flexible() {
        let registry = coxql();
        let a = parse_label("filter id 68 and influence topk 10", &registry).unwrap();
        let b = parse_label("  filter   id 68\tand influence topk 10 ", &registry).unwrap();
        assert_eq!(a, b);
    }
}
