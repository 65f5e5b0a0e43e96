//! Token-level Earley recognition.
//!
//! An Earley recognizer handles every context-free grammar — including the
//! left-recursive connector chains and the benign ambiguity between fixed
//! keywords and the free identifier class — without grammar surgery. The
//! chart is kept in full so recognition state can be cloned cheaply for
//! speculative work and the last column popped to undo a committed token.

use std::collections::HashSet;

use crate::grammar::rules::{Grammar, Symbol, Terminal};

/// One dotted rule: `rule`'s right-hand side with the dot before position
/// `dot`, started at input position `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Item {
    rule: u32,
    dot: u32,
    origin: u32,
}

type Column = Vec<Item>;

/// Incremental recognizer: feed committed tokens one at a time and inspect
/// which terminals may come next.
#[derive(Debug, Clone)]
pub struct TokenRecognizer<'g> {
    grammar: &'g Grammar,
    chart: Vec<Column>,
}

impl<'g> TokenRecognizer<'g> {
    pub fn new(grammar: &'g Grammar) -> TokenRecognizer<'g> {
        let mut rec = TokenRecognizer { grammar, chart: Vec::new() };
        let mut col0 = vec![Item { rule: grammar.aug_rule() as u32, dot: 0, origin: 0 }];
        rec.close(&mut col0, 0);
        rec.chart.push(col0);
        rec
    }

    pub fn grammar(&self) -> &'g Grammar {
        self.grammar
    }

    /// Number of tokens consumed so far.
    pub fn position(&self) -> usize {
        self.chart.len() - 1
    }

    /// Does the token sequence consumed so far belong to the language?
    pub fn is_accepting(&self) -> bool {
        self.frontier().iter().any(|it| self.is_final(it))
    }

    /// The distinct terminals that may come next, in first-seen order.
    pub fn allowed_terminals(&self) -> Vec<Terminal> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for item in self.frontier() {
            if let Some(Symbol::T(t)) = self.after_dot(item) {
                if seen.insert(t.clone()) {
                    out.push(t.clone());
                }
            }
        }
        out
    }

    /// Would `tok` be scannable right now? (Cheaper than a full advance.)
    pub fn can_advance(&self, tok: &str) -> bool {
        self.frontier().iter().any(|item| {
            matches!(self.after_dot(item), Some(Symbol::T(t)) if t.matches(tok))
        })
    }

    /// Consume one committed token. On failure the recognizer is unchanged.
    pub fn advance(&mut self, tok: &str) -> Result<(), NoParse> {
        let next = self.simulate_advance(tok).ok_or_else(|| NoParse(tok.to_string()))?;
        self.chart.push(next);
        Ok(())
    }

    /// Would consuming `tok` land in an accepting state?
    pub fn would_accept(&self, tok: &str) -> bool {
        self.simulate_advance(tok)
            .map(|col| col.iter().any(|it| self.is_final(it)))
            .unwrap_or(false)
    }

    /// Would consuming `tok` leave any terminal available afterwards?
    pub fn would_continue(&self, tok: &str) -> bool {
        self.simulate_advance(tok)
            .map(|col| {
                col.iter()
                    .any(|it| matches!(self.after_dot(it), Some(Symbol::T(_))))
            })
            .unwrap_or(false)
    }

    /// Undo the most recent successful [`advance`](Self::advance).
    pub(crate) fn pop_column(&mut self) {
        debug_assert!(self.chart.len() > 1, "cannot undo past the start column");
        self.chart.pop();
    }

    fn frontier(&self) -> &Column {
        self.chart.last().expect("chart always has the start column")
    }

    fn is_final(&self, item: &Item) -> bool {
        item.rule as usize == self.grammar.aug_rule() && item.dot == 1 && item.origin == 0
    }

    fn after_dot(&self, item: &Item) -> Option<&Symbol> {
        self.grammar.rules()[item.rule as usize].rhs.get(item.dot as usize)
    }

    /// The closed column that consuming `tok` would produce, or `None` if no
    /// frontier item can scan it. Read-only: the chart is not extended.
    fn simulate_advance(&self, tok: &str) -> Option<Column> {
        let mut next: Column = self
            .frontier()
            .iter()
            .filter(|item| {
                matches!(self.after_dot(item), Some(Symbol::T(t)) if t.matches(tok))
            })
            .map(|item| Item { dot: item.dot + 1, ..*item })
            .collect();
        if next.is_empty() {
            return None;
        }
        self.close(&mut next, self.chart.len());
        Some(next)
    }

    /// Predictor/completer closure of a column at position `pos`. With no
    /// epsilon rules, completions only ever look at strictly older columns,
    /// so a single growing worklist suffices.
    fn close(&self, set: &mut Column, pos: usize) {
        let mut seen: HashSet<Item> = set.iter().copied().collect();
        let mut i = 0;
        while i < set.len() {
            let item = set[i];
            i += 1;
            match self.after_dot(&item) {
                Some(Symbol::N(nt)) => {
                    for &rule in self.grammar.rules_of(*nt) {
                        let predicted =
                            Item { rule: rule as u32, dot: 0, origin: pos as u32 };
                        if seen.insert(predicted) {
                            set.push(predicted);
                        }
                    }
                }
                Some(Symbol::T(_)) => {}
                None => {
                    let lhs = self.grammar.rules()[item.rule as usize].lhs;
                    debug_assert!(
                        (item.origin as usize) < pos || pos == 0,
                        "epsilon-free grammars never complete in their origin column"
                    );
                    let parents = &self.chart[item.origin as usize];
                    for parent in parents {
                        if let Some(Symbol::N(nt)) = self.after_dot(parent) {
                            if *nt == lhs {
                                let advanced = Item { dot: parent.dot + 1, ..*parent };
                                if seen.insert(advanced) {
                                    set.push(advanced);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// The token could not extend the recognized prefix.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` cannot extend the recognized prefix")]
pub struct NoParse(pub String);

/// How many distinct sentences a grammar generates, up to a cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanguageSize {
    Exact(usize),
    /// Enumeration stopped: the language has more sentences than counted
    /// (an open terminal class was reachable, or the cap was hit).
    AtLeast(usize),
}

/// Count the sentences of `grammar` by breadth-first enumeration. Exact only
/// for finite languages over fixed keywords; any reachable integer or
/// identifier terminal, or more than `cap` sentences, stops the count.
pub fn language_size(grammar: &Grammar, cap: usize) -> LanguageSize {
    let mut frontier = vec![TokenRecognizer::new(grammar)];
    let mut count = 0;
    let mut depth = 0;
    while !frontier.is_empty() {
        // Pathological depth means unbounded recursion before acceptance.
        depth += 1;
        if depth > 64 {
            return LanguageSize::AtLeast(count);
        }
        let mut next = Vec::new();
        for rec in frontier {
            if rec.is_accepting() {
                count += 1;
                if count > cap {
                    return LanguageSize::AtLeast(cap);
                }
            }
            for terminal in rec.allowed_terminals() {
                match terminal {
                    Terminal::Fixed(s) => {
                        let mut branch = rec.clone();
                        branch.advance(&s).expect("allowed terminal advances");
                        next.push(branch);
                    }
                    Terminal::Int | Terminal::Free => return LanguageSize::AtLeast(count),
                }
            }
        }
        frontier = next;
    }
    LanguageSize::Exact(count)
}
