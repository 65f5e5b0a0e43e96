//! Grammar-constrained generation.
//!
//! Two routes to the same guarantee, chosen by backend capability:
//!
//! * **Token level** — each step computes the exact vocabulary mask for the
//!   current prefix, asks the backend what it would like to emit, and takes
//!   that piece if the mask allows it. Otherwise the loop falls back to
//!   end-of-sequence when legal, else the lowest allowed piece id, so
//!   generation always stays inside the grammar.
//! * **Text only** — the backend completes freely; the loop keeps the
//!   longest prefix the grammar can extend and, when the completion went off
//!   the rails mid-sentence, re-prompts from that prefix for a bounded
//!   number of repair rounds. If the rounds run out, the output is cut back
//!   to the longest complete sentence seen and flagged
//!   [`FinishReason::ConstraintExhausted`].

use crate::grammar::{grammar_mask, Grammar, PrefixRecognizer};

use super::backend::{Backend, BackendError, FinishReason};
use super::tokenizer::Tokenizer;

/// Budgets for one constrained generation.
#[derive(Debug, Clone, Copy)]
pub struct GenerationLimits {
    /// Token-level: maximum pieces to emit. Text-only: `max_tokens` passed
    /// to each completion call.
    pub max_steps: usize,
    /// Text-only: total completion calls allowed (first try + repairs).
    pub max_repair_rounds: usize,
}

impl Default for GenerationLimits {
    fn default() -> GenerationLimits {
        GenerationLimits { max_steps: 96, max_repair_rounds: 3 }
    }
}

/// One constrained generation's outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedOutput {
    pub text: String,
    pub finish_reason: FinishReason,
    /// Pieces emitted (token level; 0 for text-only).
    pub steps: usize,
    /// Completion calls spent (text-only; 0 for token level).
    pub repair_rounds: usize,
    /// Every prompt string the backend actually saw, in order. Token-level
    /// generation sends one; text-only repair rounds send one per round with
    /// the viable prefix appended.
    pub prompts: Vec<String>,
}

/// Generate text inside `grammar`, picking the route the backend supports.
pub fn constrained_generate(
    backend: &dyn Backend,
    tokenizer: &Tokenizer,
    grammar: &Grammar,
    prompt: &str,
    limits: GenerationLimits,
) -> Result<ConstrainedOutput, BackendError> {
    if backend.supports_token_preferences() {
        token_level(backend, tokenizer, grammar, prompt, limits)
    } else {
        text_level(backend, grammar, prompt, limits)
    }
}

fn token_level(
    backend: &dyn Backend,
    tokenizer: &Tokenizer,
    grammar: &Grammar,
    prompt: &str,
    limits: GenerationLimits,
) -> Result<ConstrainedOutput, BackendError> {
    let mut state = PrefixRecognizer::new(grammar);
    let mut text = String::new();
    let prompts = vec![prompt.to_string()];
    for step in 0..limits.max_steps {
        let mask = grammar_mask(&state, tokenizer.trie());
        if mask.is_empty() {
            // Only reachable if the vocabulary cannot spell the grammar.
            return Ok(ConstrainedOutput {
                text,
                finish_reason: FinishReason::ConstraintExhausted,
                steps: step,
                repair_rounds: 0,
                prompts,
            });
        }
        let preference = backend.preferred_continuation(prompt, &text)?;
        let eos = tokenizer.eos_id();
        let preferred_id = match preference.as_deref() {
            Some("") => Some(eos),
            Some(rest) => tokenizer.first_piece(rest),
            None => None,
        };
        let chosen = match preferred_id {
            Some(id) if mask.allows(id) => id,
            // Fallback policy: stop if the grammar lets us, otherwise the
            // lowest allowed piece — deterministic and always legal.
            _ if mask.allows(eos) => eos,
            _ => *mask
                .allowed_ids()
                .first()
                .expect("non-empty mask has an allowed id"),
        };
        if chosen == eos {
            return Ok(ConstrainedOutput {
                text,
                finish_reason: FinishReason::Eos,
                steps: step,
                repair_rounds: 0,
                prompts,
            });
        }
        let piece = tokenizer.piece(chosen);
        state
            .push_str(piece)
            .expect("a piece allowed by the mask extends the prefix");
        text.push_str(piece);
    }
    Ok(ConstrainedOutput {
        text,
        finish_reason: FinishReason::Length,
        steps: limits.max_steps,
        repair_rounds: 0,
        prompts,
    })
}

fn text_level(
    backend: &dyn Backend,
    grammar: &Grammar,
    prompt: &str,
    limits: GenerationLimits,
) -> Result<ConstrainedOutput, BackendError> {
    let mut state = PrefixRecognizer::new(grammar);
    let mut committed = String::new();
    // Byte length of the longest prefix of `committed` that is a sentence.
    let mut last_sentence = 0;
    let mut rounds = 0;
    let mut prompts = Vec::new();
    while rounds < limits.max_repair_rounds.max(1) {
        rounds += 1;
        let round_prompt = format!("{prompt}{committed}");
        let completion = backend.complete(&round_prompt, limits.max_steps)?;
        prompts.push(round_prompt);
        let mut clean = true;
        for c in completion.text.chars() {
            if state.push_char(c).is_err() {
                clean = false;
                break;
            }
            committed.push(c);
            if state.eos_allowed() {
                last_sentence = committed.len();
            }
        }
        if clean && state.eos_allowed() {
            return Ok(ConstrainedOutput {
                text: committed,
                finish_reason: FinishReason::Stop,
                steps: 0,
                repair_rounds: rounds,
                prompts,
            });
        }
        // Otherwise re-prompt from the viable prefix.
    }
    committed.truncate(last_sentence);
    Ok(ConstrainedOutput {
        text: committed,
        finish_reason: FinishReason::ConstraintExhausted,
        steps: 0,
        repair_rounds: rounds,
        prompts,
    })
}
