//! Grammar representation.
//!
//! Grammars here describe the *canonical* label language at the token level:
//! terminals are whole tokens, not characters. Three terminal forms exist —
//! fixed keywords, the integer class, and the free identifier class — and
//! rules are plain context-free productions without epsilon, which keeps the
//! recognizer simple and makes "nothing more to emit" expressible only at
//! accepting states.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::query::token;

/// A terminal of the token-level grammar.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Terminal {
    /// An exact keyword: an operation name, an integer-slot keyword, an enum
    /// value, or a connector.
    Fixed(String),
    /// The integer class (see [`token::is_int_token`]).
    Int,
    /// The free identifier class (see [`token::is_free_token`]).
    Free,
}

impl Terminal {
    pub fn fixed(s: impl Into<String>) -> Terminal {
        Terminal::Fixed(s.into())
    }

    /// Does a committed token belong to this terminal? A token may belong to
    /// several terminals at once (`lime` is both the fixed keyword `lime` and
    /// a free identifier); recognizers must scan with every match.
    pub fn matches(&self, tok: &str) -> bool {
        match self {
            Terminal::Fixed(s) => s == tok,
            Terminal::Int => token::is_int_token(tok),
            Terminal::Free => token::is_free_token(tok),
        }
    }

    /// Could `partial` grow into a token of this terminal by appending
    /// characters? Unlike [`Terminal::matches`], the reserved connectors are
    /// *not* excluded from the free class here: `and` extends to `anda`.
    pub fn viable_prefix(&self, partial: &str) -> bool {
        if partial.is_empty() {
            return true;
        }
        match self {
            Terminal::Fixed(s) => s.starts_with(partial),
            Terminal::Int => {
                partial.len() <= 9
                    && partial.bytes().all(|b| b.is_ascii_digit())
                    && !(partial.len() >= 2 && partial.starts_with('0'))
            }
            Terminal::Free => {
                let mut bytes = partial.bytes();
                let first = bytes.next().expect("checked non-empty");
                (first.is_ascii_lowercase() || first == b'_')
                    && bytes.all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
            }
        }
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Fixed(s) => write!(f, "\"{s}\""),
            Terminal::Int => f.write_str("INT"),
            Terminal::Free => f.write_str("IDENT"),
        }
    }
}

/// One position on a rule's right-hand side.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    T(Terminal),
    /// Index into the grammar's nonterminal table.
    N(usize),
}

/// A production `lhs → rhs`. Right-hand sides are never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: usize,
    pub rhs: Vec<Symbol>,
}

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("grammar has no nonterminals")]
    NoNonterminals,
    #[error("duplicate nonterminal `{0}`")]
    DuplicateNonterminal(String),
    #[error("rule for `{0}` has an empty right-hand side (epsilon rules are not supported)")]
    EmptyRhs(String),
    #[error("rule references nonterminal index {0} which does not exist")]
    UnknownNonterminal(usize),
    #[error("nonterminal `{0}` has no rules")]
    UnproductiveNonterminal(String),
    #[error("start symbol index {0} does not exist")]
    BadStart(usize),
}

/// A validated epsilon-free context-free grammar over label tokens.
///
/// Construction appends an internal augmented start rule, so acceptance is a
/// single item test regardless of how many rules the real start symbol has.
#[derive(Debug, Clone)]
pub struct Grammar {
    names: Vec<String>,
    rules: Vec<Rule>,
    rules_by_lhs: Vec<Vec<usize>>,
    start: usize,
    aug_rule: usize,
}

impl Grammar {
    pub fn new(names: Vec<String>, mut rules: Vec<Rule>, start: usize) -> Result<Grammar, GrammarError> {
        if names.is_empty() {
            return Err(GrammarError::NoNonterminals);
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(GrammarError::DuplicateNonterminal(name.clone()));
            }
        }
        if start >= names.len() {
            return Err(GrammarError::BadStart(start));
        }
        for rule in &rules {
            if rule.lhs >= names.len() {
                return Err(GrammarError::UnknownNonterminal(rule.lhs));
            }
            if rule.rhs.is_empty() {
                return Err(GrammarError::EmptyRhs(names[rule.lhs].clone()));
            }
            for sym in &rule.rhs {
                if let Symbol::N(n) = sym {
                    if *n >= names.len() {
                        return Err(GrammarError::UnknownNonterminal(*n));
                    }
                }
            }
        }
        // Augmented start: one extra nonterminal and rule, hidden from dumps.
        let aug_nt = names.len();
        let mut names = names;
        names.push("__start__".to_string());
        let aug_rule = rules.len();
        rules.push(Rule { lhs: aug_nt, rhs: vec![Symbol::N(start)] });

        let mut rules_by_lhs = vec![Vec::new(); names.len()];
        for (idx, rule) in rules.iter().enumerate() {
            rules_by_lhs[rule.lhs].push(idx);
        }
        for (nt, rule_ids) in rules_by_lhs.iter().enumerate().take(aug_nt) {
            if rule_ids.is_empty() {
                return Err(GrammarError::UnproductiveNonterminal(names[nt].clone()));
            }
        }
        Ok(Grammar { names, rules, rules_by_lhs, start, aug_rule })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub(crate) fn aug_rule(&self) -> usize {
        self.aug_rule
    }

    pub(crate) fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub(crate) fn rules_of(&self, nonterminal: usize) -> &[usize] {
        &self.rules_by_lhs[nonterminal]
    }

    pub fn nonterminal_name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    /// Every distinct fixed keyword the grammar can emit.
    pub fn fixed_terminals(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .rules
            .iter()
            .flat_map(|r| r.rhs.iter())
            .filter_map(|sym| match sym {
                Symbol::T(Terminal::Fixed(s)) => Some(s.as_str()),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Render the grammar as EBNF, one nonterminal per line, alternatives
    /// joined with `|`. The internal augmented start symbol is omitted.
    pub fn to_ebnf(&self) -> String {
        let mut out = String::new();
        for (nt, name) in self.names.iter().enumerate() {
            if nt == self.aug_nt() {
                continue;
            }
            let alts: Vec<String> = self.rules_by_lhs[nt]
                .iter()
                .map(|&r| {
                    self.rules[r]
                        .rhs
                        .iter()
                        .map(|sym| match sym {
                            Symbol::T(t) => t.to_string(),
                            Symbol::N(n) => self.names[*n].clone(),
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            out.push_str(name);
            out.push_str(" ::= ");
            out.push_str(&alts.join(" | "));
            out.push('\n');
        }
        out
    }

    fn aug_nt(&self) -> usize {
        self.names.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Grammar {
        // s → "a" | s "b" s  — ambiguous on purpose; recognizers must cope.
        Grammar::new(
            vec!["s".into()],
            vec![
                Rule { lhs: 0, rhs: vec![Symbol::T(Terminal::fixed("a"))] },
                Rule {
                    lhs: 0,
                    rhs: vec![
                        Symbol::N(0),
                        Symbol::T(Terminal::fixed("b")),
                        Symbol::N(0),
                    ],
                },
            ],
            0,
        )
        .unwrap()
    }

    #[test]
    fn terminal_matching() {
        assert!(Terminal::fixed("and").matches("and"));
        assert!(!Terminal::Free.matches("and"));
        assert!(Terminal::Free.matches("anda"));
        assert!(Terminal::Int.matches("68"));
        assert!(!Terminal::Int.matches("068"));
    }

    #[test]
    fn viable_prefixes() {
        assert!(Terminal::fixed("predict").viable_prefix("pred"));
        assert!(!Terminal::fixed("predict").viable_prefix("preda"));
        assert!(Terminal::Int.viable_prefix("6"));
        assert!(!Terminal::Int.viable_prefix("06"));
        assert!(!Terminal::Int.viable_prefix("1234567890"));
        // The free class stays viable through reserved words: `and` → `anda`.
        assert!(Terminal::Free.viable_prefix("and"));
        assert!(!Terminal::Free.viable_prefix("1a"));
    }

    #[test]
    fn rejects_epsilon_rules() {
        let err = Grammar::new(
            vec!["s".into()],
            vec![Rule { lhs: 0, rhs: vec![] }],
            0,
        )
        .unwrap_err();
        assert!(matches!(err, GrammarError::EmptyRhs(_)));
    }

    #[test]
    fn rejects_unproductive_nonterminals() {
        let err = Grammar::new(
            vec!["s".into(), "dead".into()],
            vec![Rule { lhs: 0, rhs: vec![Symbol::T(Terminal::fixed("a"))] }],
            0,
        )
        .unwrap_err();
        assert!(matches!(err, GrammarError::UnproductiveNonterminal(name) if name == "dead"));
    }

    #[test]
    fn ebnf_dump_hides_augmented_start() {
        let ebnf = tiny().to_ebnf();
        assert_eq!(ebnf, "s ::= \"a\" | s \"b\" s\n");
    }
}
