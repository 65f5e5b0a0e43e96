//! Vocabulary masks for constrained decoding.
//!
//! Given a [`PrefixRecognizer`] state and a decoding vocabulary, the mask
//! marks every vocabulary piece whose characters all extend the prefix (plus
//! end-of-sequence when the stream may stop). The efficient path walks a
//! character trie over the vocabulary with a single undoable recognizer, so
//! shared prefixes are checked once; [`brute_force_mask`] redoes the work
//! piece-by-piece and exists as an independent oracle for tests.

use std::collections::HashMap;

use super::prefix::PrefixRecognizer;

/// A set of allowed vocabulary ids, stored as a bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenMask {
    bits: Vec<u64>,
    vocab_size: usize,
}

impl TokenMask {
    pub fn new(vocab_size: usize) -> TokenMask {
        TokenMask { bits: vec![0; vocab_size.div_ceil(64)], vocab_size }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn set(&mut self, id: u32) {
        let id = id as usize;
        assert!(id < self.vocab_size, "id {id} outside vocabulary");
        self.bits[id / 64] |= 1 << (id % 64);
    }

    pub fn allows(&self, id: u32) -> bool {
        let id = id as usize;
        id < self.vocab_size && self.bits[id / 64] & (1 << (id % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    /// Ascending ids of every allowed piece.
    pub fn allowed_ids(&self) -> Vec<u32> {
        (0..self.vocab_size as u32).filter(|&id| self.allows(id)).collect()
    }

    /// Keep only ids allowed by both masks.
    pub fn intersect(&mut self, other: &TokenMask) {
        assert_eq!(self.vocab_size, other.vocab_size, "mask vocabulary mismatch");
        for (w, o) in self.bits.iter_mut().zip(&other.bits) {
            *w &= o;
        }
    }
}

/// A character trie over the decoding vocabulary. End-of-sequence ids are
/// held separately: they are control pieces with no text to walk.
#[derive(Debug, Clone)]
pub struct VocabTrie {
    nodes: Vec<TrieNode>,
    eos_ids: Vec<u32>,
    vocab_size: usize,
}

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: Vec<(char, usize)>,
    token_ids: Vec<u32>,
}

impl VocabTrie {
    /// Build from `(id, text)` pairs for every textual piece, the ids that
    /// mean end-of-sequence, and the total vocabulary size (ids are indices
    /// below it).
    pub fn build<'a>(
        pieces: impl IntoIterator<Item = (u32, &'a str)>,
        eos_ids: Vec<u32>,
        vocab_size: usize,
    ) -> VocabTrie {
        let mut nodes = vec![TrieNode::default()];
        for (id, text) in pieces {
            debug_assert!((id as usize) < vocab_size);
            let mut at = 0;
            for c in text.chars() {
                let found = nodes[at].children.iter().find(|(edge, _)| *edge == c);
                at = match found {
                    Some((_, child)) => *child,
                    None => {
                        let child = nodes.len();
                        nodes.push(TrieNode::default());
                        nodes[at].children.push((c, child));
                        child
                    }
                };
            }
            nodes[at].token_ids.push(id);
        }
        VocabTrie { nodes, eos_ids, vocab_size }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn eos_ids(&self) -> &[u32] {
        &self.eos_ids
    }
}

/// The exact set of vocabulary pieces that can extend `state`, via a
/// depth-first trie walk with undo — each trie edge is pushed at most once.
pub fn grammar_mask(state: &PrefixRecognizer<'_>, trie: &VocabTrie) -> TokenMask {
    let mut mask = TokenMask::new(trie.vocab_size());
    if state.eos_allowed() {
        for &id in trie.eos_ids() {
            mask.set(id);
        }
    }
    let mut walker = Walker { rec: state.clone(), undo: Vec::new() };
    walk(trie, 0, &mut walker, &mut mask);
    mask
}

/// The same set, computed independently: every piece replayed char-by-char
/// on a fresh clone. Slow and branchless on purpose; the test oracle.
pub fn brute_force_mask(
    state: &PrefixRecognizer<'_>,
    pieces: &HashMap<u32, String>,
    eos_ids: &[u32],
    vocab_size: usize,
) -> TokenMask {
    let mut mask = TokenMask::new(vocab_size);
    if state.eos_allowed() {
        for &id in eos_ids {
            mask.set(id);
        }
    }
    for (&id, text) in pieces {
        if state.can_push_str(text) {
            mask.set(id);
        }
    }
    mask
}

enum Undo {
    /// A plain character was pushed onto the buffer.
    Char,
    /// A separator committed the buffer; restore it and pop the chart column.
    Commit(String),
}

struct Walker<'g> {
    rec: PrefixRecognizer<'g>,
    undo: Vec<Undo>,
}

impl Walker<'_> {
    fn try_push(&mut self, c: char) -> bool {
        let commit = (c == ' ').then(|| self.rec.buffer().to_string());
        if self.rec.push_char(c).is_err() {
            return false;
        }
        self.undo.push(match commit {
            Some(buffer) => Undo::Commit(buffer),
            None => Undo::Char,
        });
        true
    }

    fn pop(&mut self) {
        match self.undo.pop().expect("pop without push") {
            Undo::Char => {
                self.rec.buffer.pop();
            }
            Undo::Commit(buffer) => {
                self.rec.tokens.pop_column();
                self.rec.buffer = buffer;
            }
        }
    }
}

fn walk(trie: &VocabTrie, node: usize, walker: &mut Walker<'_>, mask: &mut TokenMask) {
    for &(c, child) in &trie.nodes[node].children {
        if walker.try_push(c) {
            for &id in &trie.nodes[child].token_ids {
                mask.set(id);
            }
            walk(trie, child, walker, mask);
            walker.pop();
        }
    }
}
