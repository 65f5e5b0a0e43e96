//! Deriving grammars from an operation registry.
//!
//! Three grammars matter in practice:
//!
//! * [`full_grammar`] — the whole canonical label language: clauses joined by
//!   connectors, every rendered slot spelled out. This is what end-to-end
//!   guided decoding uses.
//! * [`intent_only_grammar`] — exactly one token naming any operation; its
//!   language size equals the registry size. Used to force a model to commit
//!   to a single coarse intent (optionally restricted to retrieved
//!   candidates).
//! * [`intent_grammar`] — the sub-language of labels whose main operation is
//!   fixed: optional `filter id <n> and` prefixes, then that operation's
//!   clause. Used to fill in attributes after the intent is known.

use thiserror::Error;

use crate::query::{Category, OperationSpec, Registry, SlotKind};

use super::rules::{Grammar, Rule, Symbol, Terminal};

/// Why a derived grammar could not be built.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("`{0}` is not an operation in this registry")]
    UnknownOperation(String),
    #[error("`{0}` is a connector; connectors have no intent grammar")]
    ConnectorIntent(String),
    #[error("no operations selected")]
    NoOperations,
}

/// Accumulates nonterminals and rules while translating a registry.
struct Builder {
    names: Vec<String>,
    rules: Vec<Rule>,
}

impl Builder {
    fn new() -> Builder {
        Builder { names: Vec::new(), rules: Vec::new() }
    }

    fn nonterminal(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    fn rule(&mut self, lhs: usize, rhs: Vec<Symbol>) {
        self.rules.push(Rule { lhs, rhs });
    }

    /// The right-hand side of one operation's clause: its name keyword
    /// followed by every rendered slot. Enum slots become their own
    /// nonterminal so the dump stays readable.
    fn clause_rhs(&mut self, op: &OperationSpec) -> Vec<Symbol> {
        let mut rhs = vec![Symbol::T(Terminal::fixed(&op.name))];
        for slot in op.rendered_slots() {
            match slot.kind {
                SlotKind::Integer => {
                    rhs.push(Symbol::T(Terminal::fixed(&slot.name)));
                    rhs.push(Symbol::T(Terminal::Int));
                }
                SlotKind::EnumToken => {
                    let nt = self.nonterminal(format!("{}_{}", op.name, slot.name));
                    for value in &slot.allowed_values {
                        self.rule(nt, vec![Symbol::T(Terminal::fixed(value))]);
                    }
                    rhs.push(Symbol::N(nt));
                }
                SlotKind::FreeToken => rhs.push(Symbol::T(Terminal::Free)),
                SlotKind::None => unreachable!("rendered_slots filters kind none"),
            }
        }
        rhs
    }

    fn finish(self, start: usize) -> Grammar {
        Grammar::new(self.names, self.rules, start).expect("derived grammars are well-formed")
    }
}

/// The canonical label language of a whole registry.
pub fn full_grammar(registry: &Registry) -> Grammar {
    let mut b = Builder::new();
    let query = b.nonterminal("query");
    let clause = b.nonterminal("clause");
    b.rule(query, vec![Symbol::N(clause)]);
    for connector in registry.connector_names() {
        b.rule(
            query,
            vec![Symbol::N(query), Symbol::T(Terminal::fixed(connector)), Symbol::N(clause)],
        );
    }
    for op in registry.clause_operations() {
        let nt = b.nonterminal(format!("clause_{}", op.name));
        let rhs = b.clause_rhs(op);
        b.rule(nt, rhs);
        b.rule(clause, vec![Symbol::N(nt)]);
    }
    b.finish(query)
}

/// A one-token language naming each operation of the registry — connectors
/// included, since mistaking a connector for an intent is a real model error
/// worth representing. Its size equals `registry.len()`.
pub fn intent_only_grammar(registry: &Registry) -> Grammar {
    intent_only_grammar_over(registry, &names_of(registry))
        .expect("a validated registry is non-empty")
}

/// A one-token language over a chosen subset of operation names, e.g. the
/// candidates retrieved for one utterance.
pub fn intent_only_grammar_over(
    registry: &Registry,
    names: &[&str],
) -> Result<Grammar, BuildError> {
    if names.is_empty() {
        return Err(BuildError::NoOperations);
    }
    let mut b = Builder::new();
    let intent = b.nonterminal("intent");
    for name in names {
        if !registry.contains(name) {
            return Err(BuildError::UnknownOperation(name.to_string()));
        }
        b.rule(intent, vec![Symbol::T(Terminal::fixed(*name))]);
    }
    Ok(b.finish(intent))
}

/// The sub-language of canonical labels whose main operation is `op_name`:
/// zero or more `filter id <n> and` prefixes (when the registry has both an
/// id filter and `and`), then the operation's fully spelled-out clause.
pub fn intent_grammar(registry: &Registry, op_name: &str) -> Result<Grammar, BuildError> {
    let Some(op) = registry.get(op_name) else {
        return Err(BuildError::UnknownOperation(op_name.to_string()));
    };
    if op.category == Category::Logic {
        return Err(BuildError::ConnectorIntent(op_name.to_string()));
    }
    let mut b = Builder::new();
    let query = b.nonterminal("intent_query");
    let clause_nt = b.nonterminal(format!("clause_{}", op.name));
    let rhs = b.clause_rhs(op);
    b.rule(clause_nt, rhs);
    b.rule(query, vec![Symbol::N(clause_nt)]);

    let id_filter = registry
        .get("filter")
        .filter(|f| f.category == Category::Filter)
        .filter(|_| registry.connector_names().contains(&"and"));
    if let Some(filter_op) = id_filter {
        // Self-prefixing is already covered by the plain clause rule.
        if filter_op.name != op.name {
            let filter_nt = b.nonterminal(format!("clause_{}", filter_op.name));
            let rhs = b.clause_rhs(filter_op);
            b.rule(filter_nt, rhs);
            b.rule(
                query,
                vec![Symbol::N(filter_nt), Symbol::T(Terminal::fixed("and")), Symbol::N(query)],
            );
        }
    }
    Ok(b.finish(query))
}

fn names_of(registry: &Registry) -> Vec<&str> {
    registry.operations().iter().map(|op| op.name.as_str()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::earley::{language_size, LanguageSize, TokenRecognizer};

    fn accepts(grammar: &Grammar, label: &str) -> bool {
        let mut rec = TokenRecognizer::new(grammar);
        for tok in label.split_whitespace() {
            if rec.advance(tok).is_err() {
                return false;
            }
        }
        rec.is_accepting()
    }

    #[test]
    fn full_grammar_accepts_canonical_labels() {
        let grammar = full_grammar(&Registry::coxql());
        for label in [
            "predict",
            "nlpattribute topk 5 attention",
            "filter id 68 and influence topk 10",
            "predictfilter positive or labelfilter negative",
            "mistake count and score accuracy",
            "lengthfilter words len 10",
            "tutorial predict",
            "keywords topk 10 and predict",
        ] {
            assert!(accepts(&grammar, label), "should accept {label:?}");
        }
    }

    #[test]
    fn full_grammar_rejects_uncanonical_or_invalid_labels() {
        let grammar = full_grammar(&Registry::coxql());
        for label in [
            "nlpattribute topk 5",       // canonical form spells out `method`
            "score",                     // canonical form spells out `metric`
            "similar topk banana",
            "filter id 068",
            "predict and",
            "and predict",
            "banana",
            "predict banana",
        ] {
            assert!(!accepts(&grammar, label), "should reject {label:?}");
        }
    }

    #[test]
    fn intent_only_language_size_equals_registry_size() {
        let coxql = Registry::coxql();
        assert_eq!(
            language_size(&intent_only_grammar(&coxql), 1000),
            LanguageSize::Exact(coxql.len())
        );
        let compass = Registry::compass();
        assert_eq!(
            language_size(&intent_only_grammar(&compass), 1000),
            LanguageSize::Exact(compass.len())
        );
    }

    #[test]
    fn intent_only_subset_restricts_the_language() {
        let registry = Registry::coxql();
        let grammar =
            intent_only_grammar_over(&registry, &["predict", "similar", "cfe"]).unwrap();
        assert_eq!(language_size(&grammar, 100), LanguageSize::Exact(3));
        assert!(accepts(&grammar, "similar"));
        assert!(!accepts(&grammar, "rationalize"));

        let err = intent_only_grammar_over(&registry, &["banana"]).unwrap_err();
        assert!(matches!(err, BuildError::UnknownOperation(_)));
    }

    #[test]
    fn intent_grammar_pins_the_main_operation() {
        let registry = Registry::coxql();
        let grammar = intent_grammar(&registry, "nlpattribute").unwrap();
        assert!(accepts(&grammar, "nlpattribute topk 5 attention"));
        assert!(accepts(&grammar, "filter id 68 and nlpattribute topk 10 lime"));
        assert!(accepts(&grammar, "filter id 1 and filter id 2 and nlpattribute topk 5 attention"));
        assert!(!accepts(&grammar, "nlpattribute topk 5"));
        assert!(!accepts(&grammar, "predict"));
        assert!(!accepts(&grammar, "filter id 68"));
        assert!(!accepts(&grammar, "nlpattribute topk 5 attention and predict"));
    }

    #[test]
    fn intent_grammar_without_filters_is_a_single_clause() {
        let registry = Registry::compass();
        let grammar = intent_grammar(&registry, "knowledge_edit").unwrap();
        assert_eq!(language_size(&grammar, 100), LanguageSize::Exact(1));
        assert!(accepts(&grammar, "knowledge_edit"));
    }

    #[test]
    fn intent_grammar_rejects_connectors() {
        let err = intent_grammar(&Registry::coxql(), "and").unwrap_err();
        assert!(matches!(err, BuildError::ConnectorIntent(_)));
    }

    #[test]
    fn intent_grammar_for_the_id_filter_itself() {
        let registry = Registry::coxql();
        let grammar = intent_grammar(&registry, "filter").unwrap();
        assert!(accepts(&grammar, "filter id 68"));
        assert!(!accepts(&grammar, "filter id 68 and filter id 69"));
    }

    #[test]
    fn ebnf_dump_names_registry_operations() {
        let ebnf = full_grammar(&Registry::coxql()).to_ebnf();
        assert!(ebnf.starts_with("query ::= clause | query \"and\" clause | query \"or\" clause"));
        assert!(ebnf.contains("clause_nlpattribute ::= \"nlpattribute\" \"topk\" INT nlpattribute_method"));
        assert!(ebnf.contains("nlpattribute_method ::= \"lime\" | \"input_x_gradient\" | \"integrated_gradients\" | \"attention\""));
    }
}
