//! Template checking and repair.
//!
//! Free-form model output is rarely exactly canonical. [`template_check`]
//! classifies a candidate label into three buckets:
//!
//! * **Valid** — parses and every rendered slot is spelled out; the label is
//!   already canonical up to whitespace.
//! * **Repaired** — salvageable by two mechanical fixes: dropping a trailing
//!   suffix that cannot extend the parse (e.g. prose appended after a
//!   complete label, or a connector left dangling at the very end), and
//!   filling omitted optional slots with their registry defaults.
//! * **Rejected** — everything else. Repair never second-guesses committed
//!   structure: once a slot keyword or connector has been consumed, a bad
//!   continuation is fatal (`similar topk banana` is rejected, not truncated
//!   to `similar`).

use super::parser::{ParseError, Walker};
use super::registry::Registry;
use super::tree::{canonicalize, serialize, ParseTree};

/// Outcome of [`template_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckResult {
    /// Parses with every rendered slot explicit.
    Valid { tree: ParseTree },
    /// Parses after truncation and/or default filling. `tree` has every slot
    /// bound and `canonical` is its rendering.
    Repaired { tree: ParseTree, canonical: String },
    /// Not salvageable; the error from the unrepaired parse attempt.
    Rejected { error: ParseError },
}

impl CheckResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, CheckResult::Valid { .. })
    }

    pub fn is_rejected(&self) -> bool {
        matches!(self, CheckResult::Rejected { .. })
    }

    /// The accepted tree, for both `Valid` and `Repaired`.
    pub fn accepted(&self) -> Option<&ParseTree> {
        match self {
            CheckResult::Valid { tree } | CheckResult::Repaired { tree, .. } => Some(tree),
            CheckResult::Rejected { .. } => None,
        }
    }
}

/// Check a candidate label, applying the repairs described at module level.
pub fn template_check(label: &str, registry: &Registry) -> CheckResult {
    let tokens: Vec<&str> = label.split_whitespace().collect();
    let mut walker = Walker::new(&tokens, registry);

    // The first clause gets no safety net: with no complete parse behind it
    // there is nothing to truncate back to.
    let mut clauses = match walker.parse_clause() {
        Ok(clause) => vec![clause],
        Err(error) => return CheckResult::Rejected { error },
    };
    let mut connectors = Vec::new();
    let mut truncated = false;
    while let Some(tok) = walker.peek() {
        let Some(conn) = walker.connector(tok) else {
            // Cannot extend a complete parse: drop this token and the rest.
            truncated = true;
            break;
        };
        walker.bump();
        if walker.at_end() {
            // Connector with nothing after it: an incomplete tail, dropped.
            truncated = true;
            break;
        }
        // Past this point the connector is committed; a failing clause
        // rejects the whole label.
        match walker.parse_clause() {
            Ok(clause) => {
                connectors.push(conn);
                clauses.push(clause);
            }
            Err(error) => return CheckResult::Rejected { error },
        }
    }

    let tree = ParseTree { clauses, connectors };
    let filled = canonicalize(&tree, registry)
        .expect("a tree assembled from successful clause parses canonicalizes");
    if !truncated && filled == tree {
        CheckResult::Valid { tree }
    } else {
        let canonical = serialize(&filled, registry).expect("canonical trees serialize");
        CheckResult::Repaired { tree: filled, canonical }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coxql() -> Registry {
        Registry::coxql()
    }

    fn repaired_to(label: &str) -> impl Fn(CheckResult) -> bool + '_ {
        move |result| match result {
            CheckResult::Repaired { canonical, .. } => canonical == label,
            _ => false,
        }
    }

    #[test]
    fn fully_specified_labels_are_valid() {
        assert!(template_check("nlpattribute topk 5 attention", &coxql()).is_valid());
        assert!(template_check("filter id 68 and influence topk 10", &coxql()).is_valid());
        assert!(template_check("predict", &coxql()).is_valid());
        assert!(template_check("mistake count", &coxql()).is_valid());
    }

    #[test]
    fn omitted_defaults_are_repaired() {
        let result = template_check("nlpattribute topk 5", &coxql());
        assert!(repaired_to("nlpattribute topk 5 attention")(result));

        let result = template_check("score", &coxql());
        assert!(repaired_to("score accuracy")(result));

        let result = template_check("filter id 68 and influence", &coxql());
        assert!(repaired_to("filter id 68 and influence topk 5")(result));
    }

    #[test]
    fn garbage_suffix_is_truncated() {
        let result = template_check("predict banana", &coxql());
        assert!(repaired_to("predict")(result));

        // Prose appended after a complete label, a familiar model failure.
        let result = template_check(
            "nlpattribute topk 5 attention because the user asked for five words",
            &coxql(),
        );
        assert!(repaired_to("nlpattribute topk 5 attention")(result));
    }

    #[test]
    fn dangling_connector_at_end_is_truncated() {
        let result = template_check("filter id 68 and", &coxql());
        assert!(repaired_to("filter id 68")(result));
    }

    #[test]
    fn truncation_and_filling_compose() {
        let result = template_check("similar explained above", &coxql());
        assert!(repaired_to("similar topk 3")(result));
    }

    #[test]
    fn committed_keyword_with_bad_value_is_rejected() {
        let result = template_check("similar topk banana", &coxql());
        assert!(matches!(
            result,
            CheckResult::Rejected { error: ParseError::BadSlotValue { .. } }
        ));
    }

    #[test]
    fn committed_connector_with_bad_clause_is_rejected() {
        let result = template_check("predict and banana", &coxql());
        assert!(matches!(
            result,
            CheckResult::Rejected { error: ParseError::UnknownOperation(tok) } if tok == "banana"
        ));
    }

    #[test]
    fn hopeless_labels_are_rejected() {
        assert!(template_check("", &coxql()).is_rejected());
        assert!(template_check("the model should predict", &coxql()).is_rejected());
        assert!(template_check("filter id sixty_eight", &coxql()).is_rejected());
    }

    #[test]
    fn valid_result_keeps_explicit_tree() {
        let CheckResult::Valid { tree } = template_check("keywords topk 10", &coxql()) else {
            panic!("expected valid");
        };
        assert_eq!(tree.clauses[0].get("topk"), Some("10"));
    }
}
