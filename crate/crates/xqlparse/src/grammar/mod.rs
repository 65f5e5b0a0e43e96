//! Grammar-constrained recognition of the label language.
//!
//! The pieces, bottom to top:
//!
//! * [`Grammar`] — epsilon-free context-free rules over label tokens, with
//!   three terminal forms (fixed keywords, integers, free identifiers) and an
//!   EBNF dump for inspection.
//! * builders — [`full_grammar`], [`intent_only_grammar`], [`intent_grammar`]
//!   derive the useful grammars from an operation registry.
//! * [`TokenRecognizer`] — incremental Earley recognition over committed
//!   label tokens.
//! * [`PrefixRecognizer`] — the same at character granularity, as decoding
//!   streams see the text; tracks a partial-token buffer and knows when
//!   end-of-sequence is legal.
//! * [`grammar_mask`] — which vocabulary pieces may come next, computed by a
//!   trie walk and cross-checked by [`brute_force_mask`].
//! * [`sample_sentence`] — random sentences for fuzzing the stack.

mod build;
mod earley;
mod mask;
mod prefix;
mod rules;
mod sample;

pub use build::{full_grammar, intent_grammar, intent_only_grammar, intent_only_grammar_over, BuildError};
pub use earley::{language_size, LanguageSize, NoParse, TokenRecognizer};
pub use mask::{brute_force_mask, grammar_mask, TokenMask, VocabTrie};
pub use prefix::{PrefixError, PrefixRecognizer};
pub use rules::{Grammar, GrammarError, Rule, Symbol, Terminal};
pub use sample::sample_sentence;
