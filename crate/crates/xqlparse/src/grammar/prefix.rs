//! Character-level prefix recognition.
//!
//! Constrained decoding feeds text in vocabulary-tokenizer pieces, which cut
//! across label tokens arbitrarily. [`PrefixRecognizer`] therefore tracks two
//! layers: a token-level Earley chart over everything *committed* so far, and
//! a buffer holding the characters of the label token currently being typed.
//! A space commits the buffer (only where the grammar allows that token and
//! something can still follow — canonical labels never end in a space), and
//! end-of-sequence is allowed exactly when the buffer commits into an
//! accepting state.

use thiserror::Error;

use crate::grammar::earley::TokenRecognizer;
use crate::grammar::rules::{Grammar, Terminal};

/// Why a character could not extend the prefix.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("`{0:?}` cannot extend any allowed token")]
    DeadChar(char),
    #[error("a separator is not allowed here")]
    BadSeparator,
    #[error("the string cannot extend the recognized prefix (failed at byte {0})")]
    DeadString(usize),
}

/// Incremental recognizer for character streams spelling canonical labels.
///
/// Every accepted character keeps the whole stream extendable to a sentence
/// of the grammar: viability is checked on each push, so a prefix accepted
/// here is never a dead end.
#[derive(Debug, Clone)]
pub struct PrefixRecognizer<'g> {
    pub(crate) tokens: TokenRecognizer<'g>,
    pub(crate) buffer: String,
}

impl<'g> PrefixRecognizer<'g> {
    pub fn new(grammar: &'g Grammar) -> PrefixRecognizer<'g> {
        PrefixRecognizer { tokens: TokenRecognizer::new(grammar), buffer: String::new() }
    }

    /// The characters of the label token currently being typed.
    pub fn buffer(&self) -> &str {
        &self.buffer
    }

    /// Number of committed label tokens.
    pub fn committed(&self) -> usize {
        self.tokens.position()
    }

    /// The full text consumed so far would be a sentence if generation
    /// stopped here: the buffer commits into an accepting state.
    pub fn eos_allowed(&self) -> bool {
        !self.buffer.is_empty() && self.tokens.would_accept(&self.buffer)
    }

    /// Push one character. On failure the recognizer is unchanged.
    pub fn push_char(&mut self, c: char) -> Result<(), PrefixError> {
        if c == ' ' {
            // A space commits the buffered token; it is only canonical when
            // a further token can follow.
            if self.buffer.is_empty() || !self.tokens.would_continue(&self.buffer) {
                return Err(PrefixError::BadSeparator);
            }
            self.tokens
                .advance(&self.buffer)
                .expect("would_continue implies the token advances");
            self.buffer.clear();
            return Ok(());
        }
        self.buffer.push(c);
        let viable = self
            .tokens
            .allowed_terminals()
            .iter()
            .any(|t| t.viable_prefix(&self.buffer));
        if viable {
            Ok(())
        } else {
            self.buffer.pop();
            Err(PrefixError::DeadChar(c))
        }
    }

    /// Push a whole string, all or nothing. On failure the recognizer is
    /// unchanged and the error reports the byte offset of the dead character.
    pub fn push_str(&mut self, s: &str) -> Result<(), PrefixError> {
        let mut probe = self.clone();
        for (offset, c) in s.char_indices() {
            if probe.push_char(c).is_err() {
                return Err(PrefixError::DeadString(offset));
            }
        }
        *self = probe;
        Ok(())
    }

    /// Would the whole string extend the prefix?
    pub fn can_push_str(&self, s: &str) -> bool {
        let mut probe = self.clone();
        s.chars().all(|c| probe.push_char(c).is_ok())
    }

    /// The terminals the grammar allows for the token being typed (or, with
    /// an empty buffer, for the next token).
    pub fn allowed_terminals(&self) -> Vec<Terminal> {
        self.tokens.allowed_terminals()
    }

}
