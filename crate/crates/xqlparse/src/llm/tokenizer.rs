//! Deterministic mock tokenizer.
//!
//! Constrained decoding is defined over a *vocabulary*, not over characters,
//! so testing it end-to-end needs a tokenizer with realistic shape: multi-
//! character pieces, leading-space variants, and an end-of-sequence id. This
//! one derives its vocabulary from an operation registry — every keyword of
//! the label language becomes a piece (with and without a leading space), on
//! top of all printable ASCII characters — and encodes by greedy longest
//! match, so `decode(encode(s)) == s` for any ASCII string.

use std::collections::HashMap;

use thiserror::Error;

use crate::grammar::VocabTrie;
use crate::query::{Registry, SlotKind};

/// Text that marks end-of-sequence in decoded output.
pub const EOS_TEXT: &str = "</s>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("text is not ASCII; the mock vocabulary only covers ASCII")]
    NotAscii,
}

/// A fixed vocabulary with greedy longest-match encoding.
#[derive(Debug)]
pub struct Tokenizer {
    pieces: Vec<String>,
    by_text: HashMap<String, u32>,
    max_piece_len: usize,
    trie: VocabTrie,
}

impl Tokenizer {
    /// Id 0 is always end-of-sequence.
    pub const EOS_ID: u32 = 0;

    /// Build the vocabulary for a registry: end-of-sequence, every printable
    /// ASCII character (plus tab, newline, carriage return), every digit with
    /// a leading space, and every keyword of the label language with and
    /// without a leading space.
    pub fn for_registry(registry: &Registry) -> Tokenizer {
        let mut pieces: Vec<String> = vec![EOS_TEXT.to_string()];
        let mut by_text = HashMap::new();
        let push = |pieces: &mut Vec<String>, by_text: &mut HashMap<String, u32>, text: String| {
            if !by_text.contains_key(&text) {
                by_text.insert(text.clone(), pieces.len() as u32);
                pieces.push(text);
            }
        };
        for b in b"\t\n\r".iter().copied().chain(0x20u8..=0x7e) {
            push(&mut pieces, &mut by_text, (b as char).to_string());
        }
        for d in 0..=9u8 {
            push(&mut pieces, &mut by_text, format!(" {d}"));
        }
        let mut keywords: Vec<String> = Vec::new();
        for op in registry.operations() {
            keywords.push(op.name.clone());
            for slot in &op.slots {
                match slot.kind {
                    SlotKind::Integer => keywords.push(slot.name.clone()),
                    SlotKind::EnumToken => keywords.extend(slot.allowed_values.iter().cloned()),
                    SlotKind::FreeToken | SlotKind::None => {}
                }
            }
        }
        keywords.sort_unstable();
        keywords.dedup();
        for kw in keywords {
            push(&mut pieces, &mut by_text, format!(" {kw}"));
            push(&mut pieces, &mut by_text, kw);
        }
        let max_piece_len = pieces.iter().skip(1).map(|p| p.len()).max().unwrap_or(1);
        let trie = VocabTrie::build(
            pieces.iter().enumerate().skip(1).map(|(id, text)| (id as u32, text.as_str())),
            vec![Self::EOS_ID],
            pieces.len(),
        );
        Tokenizer { pieces, by_text, max_piece_len, trie }
    }

    pub fn vocab_size(&self) -> usize {
        self.pieces.len()
    }

    pub fn eos_id(&self) -> u32 {
        Self::EOS_ID
    }

    /// The piece text for an id. The end-of-sequence id renders as
    /// [`EOS_TEXT`] but contributes nothing to decoded output.
    pub fn piece(&self, id: u32) -> &str {
        &self.pieces[id as usize]
    }

    /// Textual pieces (everything except end-of-sequence).
    pub fn textual_pieces(&self) -> impl Iterator<Item = (u32, &str)> {
        self.pieces
            .iter()
            .enumerate()
            .skip(1)
            .map(|(id, text)| (id as u32, text.as_str()))
    }

    /// The character trie over the textual pieces, for mask computation.
    pub fn trie(&self) -> &VocabTrie {
        &self.trie
    }

    /// Greedy longest-match encoding. ASCII only; never emits end-of-sequence.
    pub fn encode(&self, text: &str) -> Result<Vec<u32>, EncodeError> {
        if !text.is_ascii() {
            return Err(EncodeError::NotAscii);
        }
        let mut ids = Vec::new();
        let bytes = text.as_bytes();
        let mut at = 0;
        while at < bytes.len() {
            let end = (at + self.max_piece_len).min(bytes.len());
            let mut matched = None;
            for stop in (at + 1..=end).rev() {
                if let Some(&id) = self.by_text.get(&text[at..stop]) {
                    matched = Some((id, stop));
                    break;
                }
            }
            // Every ASCII character is a single-char piece, so a match exists
            // unless the text contains an unprintable character.
            let Some((id, stop)) = matched else {
                return Err(EncodeError::NotAscii);
            };
            ids.push(id);
            at = stop;
        }
        Ok(ids)
    }

    /// First piece of the greedy encoding of `text`, if any.
    pub fn first_piece(&self, text: &str) -> Option<u32> {
        self.encode(text).ok().and_then(|ids| ids.first().copied())
    }

    /// Concatenate pieces, stopping at the first end-of-sequence id.
    pub fn decode(&self, ids: &[u32]) -> String {
        let mut out = String::new();
        for &id in ids {
            if id == Self::EOS_ID {
                break;
            }
            out.push_str(self.piece(id));
        }
        out
    }
}
